#pragma once

#include <array>
#include <cstddef>

#include "sbb/features.hpp"

namespace sbb {

inline constexpr double kSigmaFloor = 1e-3;

/// Running per-feature mean and standard deviation over a buffer's feature
/// vectors (Welford accumulation, population convention).
struct BufferStats {
    std::size_t count = 0;
    std::array<double, kFeatureDim> mean{};
    std::array<double, kFeatureDim> m2{};

    void add(const FeatureVector& x);
    double stddev(int j) const;
    void reset();
};

/// Standardized Euclidean distance between a frame and the buffer statistics,
/// with sigma floored to keep the metric defined for constant-feature buffers.
double standardized_distance(const FeatureVector& x, const BufferStats& stats,
                             double sigma_floor = kSigmaFloor);

/// similarity = exp(-distance), in (0, 1]; 1 iff the frame equals the buffer
/// componentwise mean. Requires stats.count >= 1.
double similarity(const FeatureVector& x, const BufferStats& stats,
                  double sigma_floor = kSigmaFloor);

} // namespace sbb
