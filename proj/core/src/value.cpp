#include "sbb/value.hpp"

#include <algorithm>
#include <cmath>

#include "sbb/errors.hpp"

namespace sbb {

void EventPriors::validate() const {
    for (EventKind k : kAllEventKinds) {
        const double p = of(k);
        if (!(p > 0.0 && p < 1.0)) {
            throw ConfigError(std::string("priors: Pr(") + to_string(k) +
                              ") must lie in (0, 1)");
        }
    }
}

void ValueConfig::validate() const {
    if (!(sigma_f > 0.0)) throw ConfigError("value: sigma_f must be > 0");
}

void LabelCounts::add(EventKind kind, bool host_frame) {
    ++count[static_cast<int>(kind) - 1];
    ++total_frames;
    if (host_frame) ++host_frames;
}

LabelCounts count_labels(std::span<const EventLabel> labels) {
    LabelCounts counts;
    for (const EventLabel& l : labels) counts.add(l.kind);
    return counts;
}

EventPriors estimate_priors(const LabelCounts& counts) {
    if (counts.total_frames == 0) throw DataError("priors: empty corpus");
    if (counts.host_frames == 0) throw DataError("priors: no host frames");
    EventPriors priors;
    priors.provenance = EventPriors::Provenance::CorpusEstimated;
    for (EventKind k : kAllEventKinds) {
        const std::uint64_t n = counts.count[static_cast<int>(k) - 1];
        if (n == 0) {
            throw DataError(std::string("priors: zero ") + to_string(k) +
                            " frames in corpus; load published priors instead");
        }
        // Crash likelihood is normalized by host frames only.
        const std::uint64_t denom =
            k == EventKind::Crash ? counts.host_frames : counts.total_frames;
        priors.set(k, static_cast<double>(n) / static_cast<double>(denom));
    }
    priors.validate();
    return priors;
}

double value_denominator(const EventPriors& priors) {
    return -std::log2(priors.of(EventKind::Crash));
}

double event_value(const EventLabel& label, const EventPriors& priors) {
    if (label.kind == EventKind::Crash) return 1.0;
    if (label.kind == EventKind::Cutin) {
        throw DataError("event_value: cutin needs the range model, use cutin_value");
    }
    const double v = -std::log2(priors.of(label.kind)) / value_denominator(priors);
    return std::clamp(v, 0.0, 1.0);
}

double cutin_value(double range_m, const FittedRangeModel& model, const EventPriors& priors) {
    if (!(range_m > 0.0)) throw DataError("cutin_value: range must be > 0");
    // Pr(R < R_t) expressed through the fitted inverse-range CDF.
    const double tail = 1.0 - model.cdf(1.0 / range_m);
    if (tail <= 0.0) {
        // Numerical underflow of the tail mass: maximal surprise.
        return 1.0;
    }
    const double v = -std::log2(tail * priors.of(EventKind::Cutin)) / value_denominator(priors);
    return std::clamp(v, 0.0, 1.0);
}

std::vector<double> gaussian_filter(std::span<const double> values, double normal_value,
                                    double sigma_f) {
    if (!(sigma_f > 0.0)) throw ConfigError("gaussian_filter: sigma_f must be > 0");
    std::vector<double> filtered(values.begin(), values.end());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(values.size());
    // Skirt width where the factor underflows to numerically nothing.
    const std::ptrdiff_t reach = static_cast<std::ptrdiff_t>(std::ceil(sigma_f * 6.0));

    std::ptrdiff_t i = 0;
    while (i < n) {
        if (!(values[i] > normal_value)) {
            ++i;
            continue;
        }
        std::ptrdiff_t j = i;
        while (j + 1 < n && values[j + 1] > normal_value) ++j;
        // Event interval [i, j]: Gaussian skirts off both ends, pointwise max
        // with whatever is already there.
        const double left_peak = values[i];
        for (std::ptrdiff_t t = std::max<std::ptrdiff_t>(0, i - reach); t < i; ++t) {
            const double dt = static_cast<double>(t - i) / sigma_f;
            filtered[t] = std::max(filtered[t], left_peak * std::exp(-dt * dt));
        }
        const double right_peak = values[j];
        const std::ptrdiff_t stop = std::min(n - 1, j + reach);
        for (std::ptrdiff_t t = j + 1; t <= stop; ++t) {
            const double dt = static_cast<double>(t - j) / sigma_f;
            filtered[t] = std::max(filtered[t], right_peak * std::exp(-dt * dt));
        }
        i = j + 1;
    }
    return filtered;
}

} // namespace sbb
