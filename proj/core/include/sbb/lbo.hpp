#pragma once

#include <span>
#include <vector>

namespace sbb {

/// Quality-to-size-ratio model phi(d) = -a1*log2(1 - a2*d) + a3, monotone
/// increasing on [0, 1].
struct QualityRatioCurve {
    double a1 = 0.08;
    double a2 = 0.98;
    double a3 = 0.02;

    double ratio(double d) const;
    double ratio_derivative(double d) const;

    /// Throws ConfigError unless a1 > 0, 0 < a2 < 1, a3 >= 0 and phi(1) <= 1.
    void validate() const;
};

struct LboWeights {
    double eta = 0.9;   // storage cost weight
    double zeta = 1.7;  // value weight

    /// zeta/eta; +inf when eta == 0.
    double value_cost_ratio() const;

    /// Throws ConfigError if negative or both zero.
    void validate() const;
};

struct QualityRatioSample {
    double quality;     // d in [0, 1]
    double size_ratio;  // compressed/original
};

struct CurveFit {
    QualityRatioCurve curve;
    double rms_residual = 0.0;
    bool monotone_samples = true;  // false => fitted anyway, with a warning
};

/// Constrained least-squares fit of the curve parameters. Requires >= 5
/// samples spanning quality from <= 0.05 to >= 0.95 and at least 3 distinct
/// quality levels (else rank-deficient, DataError).
CurveFit fit_quality_ratio(std::span<const QualityRatioSample> samples);

/// Full buffer objective:
///   eta * sum c_i phi(d_i) - zeta * sum v_i d_i + sum (d_i - d_{i-1})^2.
/// Costs are in MB so the three terms share a comparable scale.
double lbo_objective(std::span<const double> decisions, std::span<const double> values,
                     std::span<const double> costs_mb, const QualityRatioCurve& curve,
                     const LboWeights& weights);

void lbo_gradient(std::span<const double> decisions, std::span<const double> values,
                  std::span<const double> costs_mb, const QualityRatioCurve& curve,
                  const LboWeights& weights, std::span<double> grad_out);

/// Largest box-KKT violation at `decisions`: |grad| at interior coordinates,
/// max(0, -grad) at 0, max(0, grad) at 1.
double kkt_residual(std::span<const double> decisions, std::span<const double> values,
                    std::span<const double> costs_mb, const QualityRatioCurve& curve,
                    const LboWeights& weights);

/// Per-frame analytic optimum of phi(d) - (zeta/eta) v d over [0, 1]:
///   d* = clamp((1 - b/r) / a2, 0, 1),  b = boundary_ratio(v), r = zeta/eta.
/// Evaluating through the boundary ratio makes d* exactly 0 at r == b.
double solve_decoupled(double v_hat, const QualityRatioCurve& curve, const LboWeights& weights);

std::vector<double> solve_decoupled(std::span<const double> v_hat, const QualityRatioCurve& curve,
                                    const LboWeights& weights);

/// zeta/eta threshold below which a frame of value v_hat is compressed to
/// quality 0: a1*a2 / (ln 2 * v_hat). +inf for v_hat = 0.
double boundary_ratio(double v_hat, const QualityRatioCurve& curve);

struct CoupledResult {
    std::vector<double> decisions;
    double objective = 0.0;
    double kkt = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Box-constrained first-order minimizer of the coupled objective (projected
/// gradient with Nesterov acceleration, backtracking line search, monotone
/// restarts). Warm-started at the decoupled solution, so the result never
/// exceeds the decoupled feasible point. Non-convergence within the iteration
/// cap returns the best iterate flagged converged = false.
CoupledResult solve_coupled(std::span<const double> values, std::span<const double> costs_mb,
                            const QualityRatioCurve& curve, const LboWeights& weights,
                            double tol = 1e-6, int max_iterations = 10000);

} // namespace sbb
