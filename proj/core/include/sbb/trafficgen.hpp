#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sbb/trajectory.hpp"
#include "sbb/types.hpp"

namespace sbb {

/// Kinematic multi-lane traffic generator configuration. Rates are per second
/// and per vehicle.
struct SimConfig {
    int n_lanes = 3;
    int n_participants = 15;
    double duration = 600.0;   // s
    double frame_rate = 10.0;  // Hz
    std::uint64_t seed = 1;

    double lane_change_rate = 0.10;  // lane-change attempts /s per participant
    double brake_rate = 0.05;        // braking impulses /s per participant
    double desired_speed_min = 24.0;  // m/s
    double desired_speed_max = 34.0;  // m/s

    double a_max = 6.0;        // |accel| bound, m/s^2
    double v_lat_max = 2.0;    // lateral speed bound, m/s
    double spawn_range = 140.0; // participants start within +-spawn_range of host, m

    std::uint64_t payload_bytes = 192000;  // synthetic raw payload per frame

    void validate() const;
};

/// Ground-truth vehicle state, exposed to observers for property tests.
struct VehicleTruth {
    double x_abs = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double ax = 0.0;
};

using SimObserver = std::function<void(double t, std::span<const VehicleTruth>)>;

/// Generates a host-perspective trajectory. The sequence is at most
/// duration * frame_rate frames and stops at the first host crash (the crash
/// frame is included). Deterministic in (config, geometry).
Trajectory generate(const SimConfig& config, const GeometryConfig& geo = {},
                    const SimObserver& observer = nullptr);

/// Overwrites states around `at` with a minimal kinematic pattern that makes
/// detect() report exactly `event.kind` at that index. Crash injection
/// truncates the trajectory at `at`. Throws DataError when `at` is out of
/// range. For cutin/conflict, event.cutin_range selects the injected range
/// (defaults: 30 m cutin, 9 m conflict).
void inject_event(Trajectory& trajectory, const EventLabel& event, std::int64_t at,
                  const GeometryConfig& geo = {});

} // namespace sbb
