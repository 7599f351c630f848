#include "sbb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sbb/errors.hpp"

namespace sbb {

RecordingReport compute_report(std::span<const RecordedFrame> recorded,
                               std::span<const std::int64_t> eoi_indices,
                               std::span<const int> context_ranges) {
    if (recorded.empty()) throw DataError("report: empty recording");

    RecordingReport report;
    report.frames = recorded.size();

    double value_sum = 0.0;
    double bytes_sum = 0.0;
    std::array<double, 5> d_sum{}, d_sq{};
    for (const RecordedFrame& f : recorded) {
        value_sum += f.v_hat * f.d;
        bytes_sum += static_cast<double>(f.stored_bytes);
        const int k = static_cast<int>(f.label) - 1;
        ++report.per_event[k].count;
        d_sum[k] += f.d;
        d_sq[k] += f.d * f.d;
    }
    const double n = static_cast<double>(recorded.size());
    report.avpf = value_sum / n;
    report.ampf = bytes_sum / n;
    if (report.ampf > 0.0) {
        report.vpm = report.avpf / report.ampf;
    } else {
        report.vpm = 0.0;
        report.vpm_defined = false;
    }
    for (int k = 0; k < 5; ++k) {
        auto& s = report.per_event[k];
        if (s.count == 0) continue;
        const double c = static_cast<double>(s.count);
        s.mean_d = d_sum[k] / c;
        s.std_d = std::sqrt(std::max(0.0, d_sq[k] / c - s.mean_d * s.mean_d));
    }

    // Contextual shares over recorded normal frames, against ground-truth EOI
    // positions (pre-eviction).
    const std::set<std::int64_t> eois(eoi_indices.begin(), eoi_indices.end());
    const auto near_eoi = [&eois](std::int64_t idx, int range) {
        const auto it = eois.lower_bound(idx - range);
        return it != eois.end() && *it <= idx + range;
    };
    for (int range : context_ranges) {
        std::size_t normal_count = 0, near_count = 0;
        double normal_bytes = 0.0, near_bytes = 0.0;
        for (const RecordedFrame& f : recorded) {
            if (f.label != EventKind::Normal) continue;
            ++normal_count;
            normal_bytes += static_cast<double>(f.stored_bytes);
            if (near_eoi(f.frame_index, range)) {
                ++near_count;
                near_bytes += static_cast<double>(f.stored_bytes);
            }
        }
        ContextShare share;
        share.range = range;
        if (normal_count > 0) {
            share.quantity_pct = 100.0 * static_cast<double>(near_count) /
                                 static_cast<double>(normal_count);
        }
        if (normal_bytes > 0.0) {
            share.storage_pct = 100.0 * near_bytes / normal_bytes;
        }
        report.context.push_back(share);
    }
    return report;
}

CaptureTable capture_table(const std::map<std::string, std::vector<RecordedFrame>>& recordings,
                           std::span<const EventKind> ground_truth_labels) {
    CaptureTable table;
    for (EventKind k : ground_truth_labels) {
        ++table.ground_truth[static_cast<int>(k) - 1];
    }
    for (const auto& [policy, frames] : recordings) {
        table.policies.push_back(policy);
        auto& counts = table.counts[policy];
        counts.fill(0);
        for (const RecordedFrame& f : frames) {
            // Count against ground truth so eviction comparisons line up even
            // if a recorded label was re-derived.
            const std::size_t idx = static_cast<std::size_t>(f.frame_index);
            const EventKind k = idx < ground_truth_labels.size() ? ground_truth_labels[idx]
                                                                 : f.label;
            ++counts[static_cast<int>(k) - 1];
        }
    }
    return table;
}

} // namespace sbb
