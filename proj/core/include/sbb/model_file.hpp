#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sbb/distributions.hpp"
#include "sbb/features.hpp"
#include "sbb/value.hpp"

namespace sbb {

/// Everything the recorder learns offline, bundled in one versioned document:
/// event priors, the fitted inverse-range model, the value normalization
/// denominator, and feature normalization bounds.
struct ValueModel {
    EventPriors priors;
    double denominator = 0.0;  // -log2 Pr(crash)
    std::optional<FittedRangeModel> range_model;
    FeatureBounds bounds;
    std::string provenance;

    double normal_value() const;  // v(normal), the EOI threshold

    void validate() const;
};

void save_value_model(const std::filesystem::path& path, const ValueModel& model);
ValueModel load_value_model(const std::filesystem::path& path);

/// Model mirroring the published training statistics: priors
/// {0.92, 0.045, 0.035, 0.0015, 1.19e-4} and a scaled-F inverse-range model
/// reproducing the reference cut-in values (~0.34 at 100 m, ~0.53 at 30 m).
ValueModel reference_value_model(const GeometryConfig& geo = {});

} // namespace sbb
