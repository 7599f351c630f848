#pragma once

#include <array>
#include <span>
#include <vector>

#include "sbb/types.hpp"

namespace sbb {

inline constexpr int kFeatureDim = 20;

/// 20-dim traffic state vector, ordered [y0, vx0, x1, y1, vx1, ..., x6, y6, vx6],
/// every component normalized to [0, 1].
using FeatureVector = std::array<double, kFeatureDim>;

/// Per-component normalization bounds, estimated once from a training corpus.
struct FeatureBounds {
    std::array<double, kFeatureDim> min{};
    std::array<double, kFeatureDim> max{};

    /// Throws ConfigError unless min < max for every component.
    void validate() const;
};

/// Reasonable bounds when no corpus is available: x in [-100, 100],
/// y in [0, road width], vx in [0, 45].
FeatureBounds default_feature_bounds(const GeometryConfig& geo);

/// Raw (unnormalized) 20-vector in the canonical ordering.
std::array<double, kFeatureDim> raw_feature_vector(const FrameRecord& frame);

/// Normalized feature vector; each component affinely mapped by its bounds and
/// clamped to [0, 1].
FeatureVector build_feature_vector(const FrameRecord& frame, const FeatureBounds& bounds);

/// Componentwise min/max over a corpus of frames.
FeatureBounds compute_feature_bounds(std::span<const FrameRecord> corpus);

} // namespace sbb
