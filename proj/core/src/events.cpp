#include "sbb/events.hpp"

#include <cmath>
#include <limits>

namespace sbb {

namespace {

// A region slot whose occupant jumped implausibly between frames changed
// occupant (identity is not tracked); finite differences reset in that case.
bool occupant_changed(const VehicleState& now, const VehicleState& before, double dt) {
    return std::abs(now.y - before.y) > 10.0 * dt || std::abs(now.x - before.x) > 150.0 * dt;
}

} // namespace

int closest_front_region(const FrameRecord& frame) {
    int best = -1;
    double best_x = std::numeric_limits<double>::infinity();
    for (int r : {0, 2, 4}) {  // regions 1, 3, 5
        if (!frame.neighbor_present[r]) continue;
        const double x = frame.neighbors[r].x;
        if (x > 0.0 && x < best_x) {
            best_x = x;
            best = r;
        }
    }
    return best;
}

bool in_proximity_zone(const VehicleState& host, const VehicleState& lead,
                       const GeometryConfig& geo) {
    // Longitudinal band of the zone, in host-relative coordinates.
    const double zone_min = lead.x - geo.car_length / 2.0 - geo.proximity_rear;
    const double zone_max = lead.x + geo.car_length / 2.0 + geo.proximity_front;
    const double host_front = host.x + geo.car_length / 2.0;
    const double host_rear = host.x - geo.car_length / 2.0;
    const bool longitudinal = host_front >= zone_min && host_rear <= zone_max;
    const bool lateral = std::abs(lead.y - host.y) <= geo.car_width;
    return longitudinal && lateral;
}

EventLabel detect(const FrameRecord& frame, const FrameRecord* prev,
                  const GeometryConfig& geo) {
    const double dt = geo.dt();

    // Crash: any neighbor box overlapping the host box.
    for (int r = 0; r < kNumRegions; ++r) {
        if (!frame.neighbor_present[r]) continue;
        const VehicleState& nb = frame.neighbors[r];
        if (std::abs(nb.x - frame.host.x) <= geo.car_length &&
            std::abs(nb.y - frame.host.y) <= geo.car_width) {
            return {EventKind::Crash, std::nullopt};
        }
    }

    // Cut-in test on the closest front vehicle; needs its lateral velocity.
    bool cutin = false;
    double cutin_range = 0.0;
    bool proximity = false;
    const int front = closest_front_region(frame);
    if (front >= 0 && prev != nullptr && prev->neighbor_present[front]) {
        const VehicleState& nb = frame.neighbors[front];
        const VehicleState& nb_prev = prev->neighbors[front];
        double y_dot = 0.0;
        if (!occupant_changed(nb, nb_prev, dt)) {
            y_dot = (nb.y - nb_prev.y) / dt;
        }
        const double dy = nb.y - frame.host.y;
        const double half_band = (geo.lane_width + geo.car_width) / 2.0;
        if ((dy > 0.0 && dy < half_band && y_dot < 0.0) ||
            (dy < 0.0 && dy > -half_band && y_dot > 0.0)) {
            cutin = true;
            cutin_range = nb.x - frame.host.x;
            proximity = in_proximity_zone(frame.host, nb, geo);
        }
    }
    if (cutin && proximity) {
        return {EventKind::Conflict, cutin_range};
    }

    // Hard braking: host deceleration by backward difference (0 on the first
    // frame of a trajectory).
    if (prev != nullptr) {
        const double accel = (frame.host.vx - prev->host.vx) / dt;
        if (accel <= geo.hard_brake_threshold) {
            return {EventKind::HardBraking, std::nullopt};
        }
    }

    if (cutin) {
        return {EventKind::Cutin, cutin_range};
    }
    return {EventKind::Normal, std::nullopt};
}

std::vector<EventLabel> label_trajectory(std::span<const FrameRecord> frames,
                                         const GeometryConfig& geo) {
    std::vector<EventLabel> labels;
    labels.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const FrameRecord* prev = i > 0 ? &frames[i - 1] : nullptr;
        labels.push_back(detect(frames[i], prev, geo));
    }
    return labels;
}

} // namespace sbb
