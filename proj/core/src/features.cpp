#include "sbb/features.hpp"

#include <algorithm>
#include <cmath>

#include "sbb/errors.hpp"

namespace sbb {

void FeatureBounds::validate() const {
    for (int j = 0; j < kFeatureDim; ++j) {
        if (!(min[j] < max[j])) {
            throw ConfigError("feature bounds: min must be < max for component " +
                              std::to_string(j));
        }
    }
}

FeatureBounds default_feature_bounds(const GeometryConfig& geo) {
    FeatureBounds b;
    // component 0: host y, 1: host vx, then (x, y, vx) per region
    b.min[0] = 0.0;
    b.max[0] = geo.road_width();
    b.min[1] = 0.0;
    b.max[1] = 45.0;
    for (int r = 0; r < kNumRegions; ++r) {
        const int base = 2 + 3 * r;
        b.min[base] = -100.0;
        b.max[base] = 100.0;
        b.min[base + 1] = 0.0;
        b.max[base + 1] = geo.road_width();
        b.min[base + 2] = 0.0;
        b.max[base + 2] = 45.0;
    }
    return b;
}

std::array<double, kFeatureDim> raw_feature_vector(const FrameRecord& frame) {
    std::array<double, kFeatureDim> raw{};
    raw[0] = frame.host.y;
    raw[1] = frame.host.vx;
    for (int r = 0; r < kNumRegions; ++r) {
        const VehicleState& nb = frame.neighbors[r];
        const int base = 2 + 3 * r;
        raw[base] = nb.x;
        raw[base + 1] = nb.y;
        raw[base + 2] = nb.vx;
    }
    return raw;
}

FeatureVector build_feature_vector(const FrameRecord& frame, const FeatureBounds& bounds) {
    const auto raw = raw_feature_vector(frame);
    FeatureVector out{};
    for (int j = 0; j < kFeatureDim; ++j) {
        if (!std::isfinite(raw[j])) {
            throw DataError("feature vector: non-finite component " + std::to_string(j) +
                            " at frame " + std::to_string(frame.frame_index));
        }
        const double span = bounds.max[j] - bounds.min[j];
        out[j] = std::clamp((raw[j] - bounds.min[j]) / span, 0.0, 1.0);
    }
    return out;
}

FeatureBounds compute_feature_bounds(std::span<const FrameRecord> corpus) {
    if (corpus.empty()) {
        throw DataError("feature bounds: empty corpus");
    }
    FeatureBounds b;
    b.min.fill(std::numeric_limits<double>::infinity());
    b.max.fill(-std::numeric_limits<double>::infinity());
    for (const FrameRecord& f : corpus) {
        const auto raw = raw_feature_vector(f);
        for (int j = 0; j < kFeatureDim; ++j) {
            b.min[j] = std::min(b.min[j], raw[j]);
            b.max[j] = std::max(b.max[j], raw[j]);
        }
    }
    // Degenerate components (constant over the corpus) get a symmetric pad so
    // the affine map stays defined.
    for (int j = 0; j < kFeatureDim; ++j) {
        if (!(b.min[j] < b.max[j])) {
            b.min[j] -= 0.5;
            b.max[j] += 0.5;
        }
    }
    return b;
}

} // namespace sbb
