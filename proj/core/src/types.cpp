#include "sbb/types.hpp"

#include <algorithm>
#include <cmath>

#include "sbb/errors.hpp"

namespace sbb {

int GeometryConfig::lane_of(double y) const {
    const int lane = static_cast<int>(std::floor(y / lane_width));
    return std::clamp(lane, 0, n_lanes - 1);
}

void GeometryConfig::validate() const {
    if (lane_width <= 0 || car_width <= 0 || car_length <= 0 ||
        proximity_front <= 0 || proximity_rear <= 0) {
        throw ConfigError("geometry: all lengths must be positive");
    }
    if (hard_brake_threshold >= 0) {
        throw ConfigError("geometry: hard_brake_threshold must be negative");
    }
    if (frame_rate <= 0) {
        throw ConfigError("geometry: frame_rate must be positive");
    }
    if (n_lanes < 1) {
        throw ConfigError("geometry: n_lanes must be >= 1");
    }
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Normal: return "normal";
        case EventKind::Cutin: return "cutin";
        case EventKind::HardBraking: return "hardbraking";
        case EventKind::Conflict: return "conflict";
        case EventKind::Crash: return "crash";
    }
    return "unknown";
}

std::optional<EventKind> event_kind_from_string(const std::string& name) {
    for (EventKind k : kAllEventKinds) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

} // namespace sbb
