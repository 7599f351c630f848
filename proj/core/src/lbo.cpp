#include "sbb/lbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbb/errors.hpp"

namespace sbb {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

double QualityRatioCurve::ratio(double d) const {
    return -a1 * std::log2(1.0 - a2 * d) + a3;
}

double QualityRatioCurve::ratio_derivative(double d) const {
    return a1 * a2 / (kLn2 * (1.0 - a2 * d));
}

void QualityRatioCurve::validate() const {
    if (!(a1 > 0.0)) throw ConfigError("curve: a1 must be > 0");
    if (!(a2 > 0.0 && a2 < 1.0)) throw ConfigError("curve: a2 must lie in (0, 1)");
    if (!(a3 >= 0.0)) throw ConfigError("curve: a3 must be >= 0");
    if (ratio(1.0) > 1.0 + 1e-9) throw ConfigError("curve: phi(1) must be <= 1");
}

double LboWeights::value_cost_ratio() const {
    if (eta == 0.0) return kInf;
    return zeta / eta;
}

void LboWeights::validate() const {
    if (eta < 0.0 || zeta < 0.0) throw ConfigError("weights: eta, zeta must be >= 0");
    if (eta == 0.0 && zeta == 0.0) throw ConfigError("weights: eta and zeta cannot both be 0");
}

double boundary_ratio(double v_hat, const QualityRatioCurve& curve) {
    if (v_hat <= 0.0) return kInf;
    return curve.a1 * curve.a2 / (kLn2 * v_hat);
}

double solve_decoupled(double v_hat, const QualityRatioCurve& curve, const LboWeights& weights) {
    if (v_hat <= 0.0) return 0.0;
    const double r = weights.value_cost_ratio();
    if (std::isinf(r)) return 1.0;  // cost-free limit
    if (r == 0.0) return 0.0;
    // d* = (1 - b/r)/a2 with b the boundary ratio; exact 0 at r == b.
    const double b = boundary_ratio(v_hat, curve);
    return std::clamp((1.0 - b / r) / curve.a2, 0.0, 1.0);
}

std::vector<double> solve_decoupled(std::span<const double> v_hat,
                                    const QualityRatioCurve& curve, const LboWeights& weights) {
    std::vector<double> out(v_hat.size());
    for (std::size_t i = 0; i < v_hat.size(); ++i) out[i] = solve_decoupled(v_hat[i], curve, weights);
    return out;
}

double lbo_objective(std::span<const double> d, std::span<const double> v,
                     std::span<const double> c, const QualityRatioCurve& curve,
                     const LboWeights& w) {
    if (d.size() != v.size() || d.size() != c.size()) {
        throw DataError("lbo objective: length mismatch");
    }
    double cost = 0.0, value = 0.0, continuity = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        cost += c[i] * curve.ratio(d[i]);
        value += v[i] * d[i];
        if (i > 0) {
            const double dd = d[i] - d[i - 1];
            continuity += dd * dd;
        }
    }
    return w.eta * cost - w.zeta * value + continuity;
}

void lbo_gradient(std::span<const double> d, std::span<const double> v,
                  std::span<const double> c, const QualityRatioCurve& curve,
                  const LboWeights& w, std::span<double> grad) {
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
        double g = w.eta * c[i] * curve.ratio_derivative(d[i]) - w.zeta * v[i];
        if (i > 0) g += 2.0 * (d[i] - d[i - 1]);
        if (i + 1 < n) g -= 2.0 * (d[i + 1] - d[i]);
        grad[i] = g;
    }
}

double kkt_residual(std::span<const double> d, std::span<const double> v,
                    std::span<const double> c, const QualityRatioCurve& curve,
                    const LboWeights& w) {
    std::vector<double> grad(d.size());
    lbo_gradient(d, v, c, curve, w, grad);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double violation;
        if (d[i] <= 0.0) {
            violation = std::max(0.0, -grad[i]);
        } else if (d[i] >= 1.0) {
            violation = std::max(0.0, grad[i]);
        } else {
            violation = std::abs(grad[i]);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

CoupledResult solve_coupled(std::span<const double> v, std::span<const double> c,
                            const QualityRatioCurve& curve, const LboWeights& w,
                            double tol, int max_iterations) {
    if (v.empty()) throw DataError("solve_coupled: empty buffer");
    if (v.size() != c.size()) throw DataError("solve_coupled: length mismatch");
    const std::size_t n = v.size();

    const auto project = [](double x) { return std::clamp(x, 0.0, 1.0); };
    const auto f = [&](const std::vector<double>& x) {
        return lbo_objective(x, v, c, curve, w);
    };

    CoupledResult result;
    // Warm start at the decoupled solution: a feasible point the solver can
    // only improve on.
    std::vector<double> x = solve_decoupled(v, curve, w);
    std::vector<double> y = x;        // extrapolated point
    std::vector<double> x_prev = x;
    std::vector<double> grad(n), trial(n);
    double fx = f(x);
    double step = 1.0;
    double momentum = 1.0;

    int it = 0;
    for (; it < max_iterations; ++it) {
        result.kkt = kkt_residual(x, v, c, curve, w);
        if (result.kkt <= tol) {
            result.converged = true;
            break;
        }
        lbo_gradient(y, v, c, curve, w, grad);
        const double fy = f(y);
        // Backtracking on the proximal descent condition at y.
        double trial_f = 0.0;
        for (int bt = 0; bt < 60; ++bt) {
            double quad = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = project(y[i] - step * grad[i]);
                const double diff = trial[i] - y[i];
                quad += grad[i] * diff + diff * diff / (2.0 * step);
            }
            trial_f = f(trial);
            if (trial_f <= fy + quad + 1e-15) break;
            step *= 0.5;
        }
        // Monotone acceleration: fall back to the previous iterate when the
        // accelerated step does not descend, and restart momentum.
        if (trial_f <= fx) {
            x_prev = x;
            x = trial;
            fx = trial_f;
            const double m_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
            const double beta = (momentum - 1.0) / m_next;
            momentum = m_next;
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = project(x[i] + beta * (x[i] - x_prev[i]));
            }
        } else {
            momentum = 1.0;
            y = x;
            step *= 1.5;
        }
    }
    result.decisions = std::move(x);
    result.objective = fx;
    result.iterations = it;
    if (!result.converged) {
        result.kkt = kkt_residual(result.decisions, v, c, curve, w);
    }
    return result;
}

namespace {

// phi is linear in (a1, a3) for fixed a2: profile them by constrained linear
// least squares inside a 1-D golden-section search over a2.
struct ProfileFit {
    double a1 = 0.0, a3 = 0.0, sse = kInf;
};

ProfileFit profile_linear(double a2, std::span<const QualityRatioSample> samples) {
    // Regressors: u = -log2(1 - a2 d), intercept.
    double suu = 0.0, su = 0.0, sy = 0.0, suy = 0.0, n = 0.0;
    for (const auto& s : samples) {
        const double u = -std::log2(1.0 - a2 * s.quality);
        suu += u * u;
        su += u;
        suy += u * s.size_ratio;
        sy += s.size_ratio;
        n += 1.0;
    }
    ProfileFit fit;
    const double det = n * suu - su * su;
    if (det <= 1e-12) return fit;
    fit.a1 = (n * suy - su * sy) / det;
    fit.a3 = (sy - fit.a1 * su) / n;
    // Box constraints: a1 > 0, a3 >= 0.
    fit.a1 = std::max(fit.a1, 1e-6);
    if (fit.a3 < 0.0) {
        fit.a3 = 0.0;
        fit.a1 = std::max(suy / suu, 1e-6);
    }
    fit.sse = 0.0;
    for (const auto& s : samples) {
        const double pred = fit.a1 * -std::log2(1.0 - a2 * s.quality) + fit.a3;
        fit.sse += (pred - s.size_ratio) * (pred - s.size_ratio);
    }
    return fit;
}

} // namespace

CurveFit fit_quality_ratio(std::span<const QualityRatioSample> samples) {
    if (samples.size() < 5) throw DataError("curve fit: need at least 5 samples");
    double qmin = kInf, qmax = -kInf;
    for (const auto& s : samples) {
        if (!(s.quality >= 0.0 && s.quality <= 1.0)) {
            throw DataError("curve fit: quality outside [0, 1]");
        }
        if (!(s.size_ratio > 0.0)) throw DataError("curve fit: size ratio must be > 0");
        qmin = std::min(qmin, s.quality);
        qmax = std::max(qmax, s.quality);
    }
    if (qmin > 0.05 + 1e-9 || qmax < 0.95) {
        throw DataError("curve fit: samples must span quality from <= 0.05 to >= 0.95");
    }
    std::vector<double> distinct;
    for (const auto& s : samples) distinct.push_back(s.quality);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   distinct.end());
    if (distinct.size() < 3) {
        throw DataError("curve fit: rank-deficient, need >= 3 distinct quality levels");
    }

    // Monotonicity of the sample means in quality is expected but not required.
    std::vector<QualityRatioSample> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.quality < b.quality; });
    bool monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].size_ratio < sorted[i - 1].size_ratio - 1e-9) monotone = false;
    }

    // Golden-section search for a2 in (0, 1).
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 1e-4, hi = 1.0 - 1e-6;
    double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    double f1 = profile_linear(m1, samples).sse;
    double f2 = profile_linear(m2, samples).sse;
    for (int i = 0; i < 200; ++i) {
        if (f1 < f2) {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - gr * (hi - lo);
            f1 = profile_linear(m1, samples).sse;
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + gr * (hi - lo);
            f2 = profile_linear(m2, samples).sse;
        }
        if (hi - lo < 1e-10) break;
    }
    const double a2 = (lo + hi) / 2.0;
    const ProfileFit best = profile_linear(a2, samples);
    if (!std::isfinite(best.sse)) throw DataError("curve fit: infeasible sample set");

    CurveFit fit;
    fit.curve = QualityRatioCurve{best.a1, a2, best.a3};
    fit.rms_residual = std::sqrt(best.sse / static_cast<double>(samples.size()));
    fit.monotone_samples = monotone;
    fit.curve.validate();
    return fit;
}

} // namespace sbb
