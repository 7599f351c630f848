#pragma once

#include <span>
#include <string>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

enum class DistFamily { Pareto, Exponential, F, Beta, Gamma };

const char* to_string(DistFamily family);

/// A fitted probability model for inverse cut-in range (support x > 0).
///
/// Parameter layout:
///   Pareto      {x_m, alpha}
///   Exponential {rate}
///   F           {dfn, dfd, scale}  (scale is 1 for fitted models; loaded
///                                   reference models may carry a scale)
///   Beta        {alpha, beta}      (support (0,1))
///   Gamma       {shape, scale}
struct FittedRangeModel {
    DistFamily family = DistFamily::Exponential;
    std::vector<double> params;
    double bic = 0.0;
    std::size_t sample_count = 0;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;

    /// Throws ConfigError if params are invalid for the family.
    void validate() const;
};

struct FamilyFit {
    DistFamily family;
    std::vector<double> params;
    double log_likelihood = 0.0;
    double bic = 0.0;
    bool converged = false;
    std::string note;  // why a family was excluded or flagged
};

struct RangeFitResult {
    FittedRangeModel best;
    std::vector<FamilyFit> candidates;
    std::vector<std::string> warnings;
};

/// Maximum-likelihood fit of every candidate family followed by BIC selection
/// (ties broken by fewer parameters). Requires >= 50 strictly positive
/// samples; families whose optimizer fails are excluded with a warning, never
/// silently selected. Throws DataError on bad input.
RangeFitResult fit_range_model(std::span<const double> inverse_range_samples);

/// k*ln(n) - 2*logL.
double bic_score(std::size_t k, std::size_t n, double log_likelihood);

} // namespace sbb
