#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

/// One frame as it survived in storage.
struct RecordedFrame {
    std::int64_t frame_index = 0;
    EventKind label = EventKind::Normal;
    double v_hat = 0.0;
    double d = 0.0;
    std::uint64_t stored_bytes = 0;
};

struct EventQualityStats {
    std::size_t count = 0;
    double mean_d = 0.0;
    double std_d = 0.0;
};

/// Share of recorded normal frames (count and storage) within +-range frames
/// of a ground-truth EOI.
struct ContextShare {
    int range = 0;
    double quantity_pct = 0.0;
    double storage_pct = 0.0;
};

struct RecordingReport {
    std::size_t frames = 0;
    double avpf = 0.0;        // mean v_hat * d
    double ampf = 0.0;        // mean stored bytes per frame
    double vpm = 0.0;         // avpf / ampf
    bool vpm_defined = true;  // false when ampf == 0
    std::array<EventQualityStats, 5> per_event{};  // by EventKind - 1
    std::vector<ContextShare> context;

    const EventQualityStats& stats(EventKind k) const {
        return per_event[static_cast<int>(k) - 1];
    }
};

inline constexpr std::array<int, 4> kDefaultContextRanges = {5, 10, 15, 20};

/// Aggregates the recording-quality metrics. eoi_indices are ground-truth EOI
/// frame indices (pre-eviction); context shares are computed over recorded
/// normal frames only. Throws DataError on an empty recording.
RecordingReport compute_report(std::span<const RecordedFrame> recorded,
                               std::span<const std::int64_t> eoi_indices,
                               std::span<const int> context_ranges = kDefaultContextRanges);

/// Recorded-frame counts per (policy, event kind) against ground truth.
struct CaptureTable {
    std::vector<std::string> policies;
    // counts[policy][kind-1]
    std::map<std::string, std::array<std::size_t, 5>> counts;
    std::array<std::size_t, 5> ground_truth{};
};

CaptureTable capture_table(const std::map<std::string, std::vector<RecordedFrame>>& recordings,
                           std::span<const EventKind> ground_truth_labels);

} // namespace sbb
