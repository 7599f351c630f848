#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sbb/distributions.hpp"
#include "sbb/types.hpp"

namespace sbb {

/// Event likelihoods Pr(e_j), j = normal..crash.
struct EventPriors {
    enum class Provenance { CorpusEstimated, Loaded };

    std::array<double, 5> pr{};  // indexed by EventKind - 1
    Provenance provenance = Provenance::Loaded;

    double of(EventKind kind) const { return pr[static_cast<int>(kind) - 1]; }
    void set(EventKind kind, double p) { pr[static_cast<int>(kind) - 1] = p; }

    /// Throws ConfigError unless every probability lies in (0, 1).
    void validate() const;
};

struct ValueConfig {
    double sigma_f = 10.0;  // Gaussian filter deviation, frames

    void validate() const;
};

/// Label tallies with the two denominators the prior estimate needs: crash
/// probability is computed over host frames only, everything else over all
/// corpus frames.
struct LabelCounts {
    std::array<std::uint64_t, 5> count{};
    std::uint64_t total_frames = 0;
    std::uint64_t host_frames = 0;

    void add(EventKind kind, bool host_frame = true);
};

LabelCounts count_labels(std::span<const EventLabel> labels);

/// Frequency estimate of the priors. Throws DataError when any event has zero
/// count, directing the caller to load published priors instead.
EventPriors estimate_priors(const LabelCounts& counts);

/// -log2 Pr(crash): the normalization that pins v(crash) = 1.
double value_denominator(const EventPriors& priors);

/// Information value of a constant-value event (anything but cutin), clamped
/// to [0, 1]. Crash returns exactly 1.
double event_value(const EventLabel& label, const EventPriors& priors);

/// Dynamic cut-in value from the fitted inverse-range model, clamped to
/// [0, 1]; monotone nonincreasing in range.
double cutin_value(double range_m, const FittedRangeModel& model, const EventPriors& priors);

/// Gaussian value filtering. Event intervals are the maximal runs of
/// raw value > normal_value, computed once from the raw sequence; outside an
/// interval the filtered value is the pointwise max of the raw value and
/// every applicable Gaussian skirt.
std::vector<double> gaussian_filter(std::span<const double> values, double normal_value,
                                    double sigma_f);

} // namespace sbb
