#include "sbb/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>

#include "sbb/errors.hpp"

namespace sbb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogLikelihoodTol = 1e-8;

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// --- per-family log-likelihoods -------------------------------------------

double loglik_exponential(double rate, std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    return n * std::log(rate) - rate * n * mean_of(xs);
}

double loglik_pareto(double xm, double alpha, std::span<const double> xs) {
    double sum_log = 0.0;
    for (double x : xs) {
        if (x < xm) return -kInf;
        sum_log += std::log(x);
    }
    const double n = static_cast<double>(xs.size());
    return n * std::log(alpha) + n * alpha * std::log(xm) - (alpha + 1.0) * sum_log;
}

double loglik_gamma(double shape, double scale, std::span<const double> xs) {
    if (shape <= 0 || scale <= 0) return -kInf;
    double ll = 0.0;
    const double lg = std::lgamma(shape);
    for (double x : xs) {
        ll += (shape - 1.0) * std::log(x) - x / scale - lg - shape * std::log(scale);
    }
    return ll;
}

double loglik_beta(double a, double b, std::span<const double> xs) {
    if (a <= 0 || b <= 0) return -kInf;
    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    double ll = 0.0;
    for (double x : xs) {
        ll += (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lbeta;
    }
    return ll;
}

double f_log_pdf(double x, double d1, double d2, double scale) {
    if (x <= 0 || d1 <= 0 || d2 <= 0 || scale <= 0) return -kInf;
    const double z = x / scale;
    const double half1 = d1 / 2.0, half2 = d2 / 2.0;
    const double lbeta = std::lgamma(half1) + std::lgamma(half2) - std::lgamma(half1 + half2);
    return half1 * std::log(d1 / d2) + (half1 - 1.0) * std::log(z) -
           (half1 + half2) * std::log1p(d1 * z / d2) - lbeta - std::log(scale);
}

double loglik_f(double d1, double d2, std::span<const double> xs) {
    double ll = 0.0;
    for (double x : xs) ll += f_log_pdf(x, d1, d2, 1.0);
    return ll;
}

// --- small Nelder-Mead in log-parameter space ------------------------------

struct NmResult {
    std::vector<double> x;
    double value = kInf;
    bool converged = false;
};

NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                     std::vector<double> x0, double step, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::pair<double, std::vector<double>>> simplex;
    simplex.reserve(n + 1);
    simplex.emplace_back(f(x0), x0);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = x0;
        v[i] += step;
        simplex.emplace_back(f(v), v);
    }
    const auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    };
    order();
    NmResult result;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(simplex.back().first - simplex.front().first) < kLogLikelihoodTol) {
            result.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].second[j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);
        const auto combine = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = centroid[j] + coef * (centroid[j] - simplex.back().second[j]);
            }
            return v;
        };
        auto reflected = combine(1.0);
        const double fr = f(reflected);
        if (fr < simplex.front().first) {
            auto expanded = combine(2.0);
            const double fe = f(expanded);
            simplex.back() = fe < fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
        } else if (fr < simplex[n - 1].first) {
            simplex.back() = {fr, reflected};
        } else {
            auto contracted = combine(-0.5);
            const double fc = f(contracted);
            if (fc < simplex.back().first) {
                simplex.back() = {fc, contracted};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i].second[j] =
                            0.5 * (simplex[i].second[j] + simplex.front().second[j]);
                    }
                    simplex[i].first = f(simplex[i].second);
                }
            }
        }
        order();
    }
    result.x = simplex.front().second;
    result.value = simplex.front().first;
    return result;
}

// --- per-family MLE fits ----------------------------------------------------

FamilyFit fit_exponential(std::span<const double> xs) {
    FamilyFit fit{DistFamily::Exponential, {}, 0.0, 0.0, true, ""};
    const double rate = 1.0 / mean_of(xs);
    fit.params = {rate};
    fit.log_likelihood = loglik_exponential(rate, xs);
    return fit;
}

FamilyFit fit_pareto(std::span<const double> xs) {
    FamilyFit fit{DistFamily::Pareto, {}, 0.0, 0.0, true, ""};
    const double xm = *std::min_element(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += std::log(x / xm);
    if (sum <= 0.0) {
        fit.converged = false;
        fit.note = "degenerate: all samples equal";
        return fit;
    }
    const double alpha = static_cast<double>(xs.size()) / sum;
    fit.params = {xm, alpha};
    fit.log_likelihood = loglik_pareto(xm, alpha, xs);
    return fit;
}

FamilyFit fit_gamma(std::span<const double> xs) {
    FamilyFit fit{DistFamily::Gamma, {}, 0.0, 0.0, false, ""};
    const double m = mean_of(xs);
    double mean_log = 0.0;
    for (double x : xs) mean_log += std::log(x);
    mean_log /= static_cast<double>(xs.size());
    const double s = std::log(m) - mean_log;
    if (s <= 0.0) {
        fit.note = "degenerate: zero log-dispersion";
        return fit;
    }
    // Newton on ln(k) - digamma(k) = s, standard initialization.
    double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    for (int it = 0; it < 100; ++it) {
        const double g = std::log(k) - boost::math::digamma(k) - s;
        const double gp = 1.0 / k - boost::math::polygamma(1, k);
        const double next = k - g / gp;
        if (!(next > 0.0)) break;
        if (std::abs(next - k) < 1e-12 * k) {
            k = next;
            fit.converged = true;
            break;
        }
        k = next;
        fit.converged = true;
    }
    const double scale = m / k;
    fit.params = {k, scale};
    fit.log_likelihood = loglik_gamma(k, scale, xs);
    return fit;
}

FamilyFit fit_beta(std::span<const double> xs) {
    FamilyFit fit{DistFamily::Beta, {}, 0.0, 0.0, false, ""};
    for (double x : xs) {
        if (x >= 1.0) {
            fit.note = "excluded: samples outside (0, 1)";
            return fit;
        }
    }
    const double m = mean_of(xs);
    double var = 0.0;
    for (double x : xs) var += (x - m) * (x - m);
    var /= static_cast<double>(xs.size());
    if (var <= 0.0) {
        fit.note = "degenerate: zero variance";
        return fit;
    }
    // Method-of-moments start, then Nelder-Mead on the negative log-likelihood
    // in log-parameter space.
    const double common = m * (1.0 - m) / var - 1.0;
    const double a0 = std::max(m * common, 1e-3);
    const double b0 = std::max((1.0 - m) * common, 1e-3);
    const auto objective = [&xs](const std::vector<double>& p) {
        return -loglik_beta(std::exp(p[0]), std::exp(p[1]), xs);
    };
    const NmResult r = nelder_mead(objective, {std::log(a0), std::log(b0)}, 0.2, 600);
    fit.converged = r.converged;
    if (!r.converged) fit.note = "optimizer did not converge";
    fit.params = {std::exp(r.x[0]), std::exp(r.x[1])};
    fit.log_likelihood = -r.value;
    return fit;
}

FamilyFit fit_f(std::span<const double> xs) {
    FamilyFit fit{DistFamily::F, {}, 0.0, 0.0, false, ""};
    const auto objective = [&xs](const std::vector<double>& p) {
        return -loglik_f(std::exp(p[0]), std::exp(p[1]), xs);
    };
    // The likelihood surface can hold shallow local optima; multi-start and
    // keep the best converged run.
    NmResult best;
    bool any = false;
    for (double d1 : {2.0, 5.0, 20.0}) {
        for (double d2 : {4.0, 8.0, 40.0}) {
            const NmResult r = nelder_mead(objective, {std::log(d1), std::log(d2)}, 0.3, 800);
            if (r.converged && (!any || r.value < best.value)) {
                best = r;
                any = true;
            }
        }
    }
    if (!any) {
        fit.note = "optimizer did not converge";
        return fit;
    }
    fit.converged = true;
    fit.params = {std::exp(best.x[0]), std::exp(best.x[1]), 1.0};
    fit.log_likelihood = -best.value;
    return fit;
}

std::size_t family_param_count(DistFamily family, const std::vector<double>& params) {
    // The fitted F carries an implicit scale of 1; only free parameters count.
    if (family == DistFamily::F && params.size() == 3 && params[2] == 1.0) return 2;
    if (family == DistFamily::Exponential) return 1;
    return params.size();
}

} // namespace

const char* to_string(DistFamily family) {
    switch (family) {
        case DistFamily::Pareto: return "pareto";
        case DistFamily::Exponential: return "exponential";
        case DistFamily::F: return "f";
        case DistFamily::Beta: return "beta";
        case DistFamily::Gamma: return "gamma";
    }
    return "unknown";
}

double bic_score(std::size_t k, std::size_t n, double log_likelihood) {
    return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

void FittedRangeModel::validate() const {
    const auto bad = [this](const char* what) -> ConfigError {
        return ConfigError(std::string("range model (") + to_string(family) + "): " + what);
    };
    switch (family) {
        case DistFamily::Pareto:
            if (params.size() != 2 || params[0] <= 0 || params[1] <= 0) throw bad("need x_m > 0, alpha > 0");
            break;
        case DistFamily::Exponential:
            if (params.size() != 1 || params[0] <= 0) throw bad("need rate > 0");
            break;
        case DistFamily::F:
            if (params.size() < 2 || params.size() > 3 || params[0] <= 0 || params[1] <= 0 ||
                (params.size() == 3 && params[2] <= 0)) {
                throw bad("need dfn > 0, dfd > 0 [, scale > 0]");
            }
            break;
        case DistFamily::Beta:
            if (params.size() != 2 || params[0] <= 0 || params[1] <= 0) throw bad("need alpha, beta > 0");
            break;
        case DistFamily::Gamma:
            if (params.size() != 2 || params[0] <= 0 || params[1] <= 0) throw bad("need shape, scale > 0");
            break;
    }
}

double FittedRangeModel::log_pdf(double x) const {
    if (x <= 0.0) return -kInf;
    switch (family) {
        case DistFamily::Pareto: {
            const double xm = params[0], alpha = params[1];
            if (x < xm) return -kInf;
            return std::log(alpha) + alpha * std::log(xm) - (alpha + 1.0) * std::log(x);
        }
        case DistFamily::Exponential:
            return std::log(params[0]) - params[0] * x;
        case DistFamily::F: {
            const double scale = params.size() == 3 ? params[2] : 1.0;
            return f_log_pdf(x, params[0], params[1], scale);
        }
        case DistFamily::Beta:
            if (x >= 1.0) return -kInf;
            return std::log(boost::math::pdf(boost::math::beta_distribution<double>(params[0], params[1]), x));
        case DistFamily::Gamma:
            return loglik_gamma(params[0], params[1], std::span<const double>(&x, 1));
    }
    return -kInf;
}

double FittedRangeModel::pdf(double x) const { return std::exp(log_pdf(x)); }

double FittedRangeModel::cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (family) {
        case DistFamily::Pareto: {
            const double xm = params[0], alpha = params[1];
            if (x < xm) return 0.0;
            return 1.0 - std::pow(xm / x, alpha);
        }
        case DistFamily::Exponential:
            return -std::expm1(-params[0] * x);
        case DistFamily::F: {
            const double scale = params.size() == 3 ? params[2] : 1.0;
            return boost::math::cdf(boost::math::fisher_f_distribution<double>(params[0], params[1]),
                                    x / scale);
        }
        case DistFamily::Beta:
            if (x >= 1.0) return 1.0;
            return boost::math::cdf(boost::math::beta_distribution<double>(params[0], params[1]), x);
        case DistFamily::Gamma:
            return boost::math::cdf(boost::math::gamma_distribution<double>(params[0], params[1]), x);
    }
    return 0.0;
}

RangeFitResult fit_range_model(std::span<const double> samples) {
    if (samples.size() < 50) {
        throw DataError("range fit: need at least 50 samples, got " +
                        std::to_string(samples.size()));
    }
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw DataError("range fit: samples must be strictly positive and finite");
        }
    }

    RangeFitResult result;
    result.candidates.push_back(fit_pareto(samples));
    result.candidates.push_back(fit_exponential(samples));
    result.candidates.push_back(fit_f(samples));
    result.candidates.push_back(fit_beta(samples));
    result.candidates.push_back(fit_gamma(samples));

    const FamilyFit* best = nullptr;
    std::size_t best_k = 0;
    for (FamilyFit& fit : result.candidates) {
        if (!fit.converged) {
            result.warnings.push_back(std::string(to_string(fit.family)) + ": " +
                                      (fit.note.empty() ? "excluded" : fit.note));
            continue;
        }
        const std::size_t k = family_param_count(fit.family, fit.params);
        fit.bic = bic_score(k, samples.size(), fit.log_likelihood);
        if (best == nullptr || fit.bic < best->bic ||
            (fit.bic == best->bic && k < best_k)) {
            best = &fit;
            best_k = k;
        }
    }
    if (best == nullptr) {
        throw DataError("range fit: no candidate family converged");
    }
    result.best.family = best->family;
    result.best.params = best->params;
    result.best.bic = best->bic;
    result.best.sample_count = samples.size();
    return result;
}

} // namespace sbb
