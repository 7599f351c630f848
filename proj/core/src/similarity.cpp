#include "sbb/similarity.hpp"

#include <cmath>

#include "sbb/errors.hpp"

namespace sbb {

void BufferStats::add(const FeatureVector& x) {
    ++count;
    for (int j = 0; j < kFeatureDim; ++j) {
        const double delta = x[j] - mean[j];
        mean[j] += delta / static_cast<double>(count);
        m2[j] += delta * (x[j] - mean[j]);
    }
}

double BufferStats::stddev(int j) const {
    if (count == 0) return 0.0;
    return std::sqrt(m2[j] / static_cast<double>(count));
}

void BufferStats::reset() {
    count = 0;
    mean.fill(0.0);
    m2.fill(0.0);
}

double standardized_distance(const FeatureVector& x, const BufferStats& stats,
                             double sigma_floor) {
    if (stats.count < 1) throw DataError("similarity: empty buffer statistics");
    double sum = 0.0;
    for (int j = 0; j < kFeatureDim; ++j) {
        const double sigma = std::max(stats.stddev(j), sigma_floor);
        const double z = (x[j] - stats.mean[j]) / sigma;
        sum += z * z;
    }
    return std::sqrt(sum);
}

double similarity(const FeatureVector& x, const BufferStats& stats, double sigma_floor) {
    return std::exp(-standardized_distance(x, stats, sigma_floor));
}

} // namespace sbb
