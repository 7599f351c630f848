#include "sbb/trafficgen.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "sbb/errors.hpp"
#include "sbb/events.hpp"
#include "sbb/rng.hpp"

namespace sbb {

using nlohmann::json;

void SimConfig::validate() const {
    if (n_lanes < 2) throw ConfigError("sim: n_lanes must be >= 2");
    if (n_participants < 0) throw ConfigError("sim: n_participants must be >= 0");
    if (!(duration > 0.0)) throw ConfigError("sim: duration must be > 0");
    if (!(frame_rate > 0.0)) throw ConfigError("sim: frame_rate must be > 0");
    if (!(desired_speed_min > 0.0) || desired_speed_max < desired_speed_min) {
        throw ConfigError("sim: desired speed range invalid");
    }
    if (!(a_max > 0.0) || !(v_lat_max > 0.0)) throw ConfigError("sim: kinematic bounds invalid");
    if (payload_bytes == 0) throw ConfigError("sim: payload_bytes must be > 0");
}

namespace {

struct Vehicle {
    double x = 0.0;   // absolute longitudinal position
    double y = 0.0;
    double vx = 0.0;
    double ax = 0.0;
    double desired_speed = 30.0;
    int lane = 0;          // target lane
    int brake_frames = 0;  // impulse frames remaining
    double brake_strength = 0.0;
};

int lane_of(double y, double lane_width, int n_lanes) {
    return std::clamp(static_cast<int>(std::floor(y / lane_width)), 0, n_lanes - 1);
}

// Nearest vehicle ahead in the same lane band within 100 m, or -1.
int find_leader(const std::vector<Vehicle>& cars, std::size_t self, double lane_width,
                int n_lanes) {
    const Vehicle& me = cars[self];
    const int my_lane = lane_of(me.y, lane_width, n_lanes);
    int leader = -1;
    double best_gap = 100.0;
    for (std::size_t i = 0; i < cars.size(); ++i) {
        if (i == self) continue;
        if (lane_of(cars[i].y, lane_width, n_lanes) != my_lane) continue;
        const double gap = cars[i].x - me.x;
        if (gap > 0.0 && gap < best_gap) {
            best_gap = gap;
            leader = static_cast<int>(i);
        }
    }
    return leader;
}

double follow_accel(const Vehicle& me, const Vehicle* leader, double car_length) {
    if (leader == nullptr) {
        return 0.6 * (me.desired_speed - me.vx);
    }
    const double gap = leader->x - me.x - car_length;
    const double desired_gap = 6.0 + 0.8 * me.vx;
    double a = 0.8 * (leader->vx - me.vx) + 0.25 * (gap - desired_gap);
    // Free-flow pull toward the desired speed when the leader is far.
    if (gap > desired_gap * 1.5) {
        a = std::max(a, 0.6 * (me.desired_speed - me.vx));
    }
    return a;
}

FrameRecord build_frame(const std::vector<Vehicle>& cars, std::int64_t index, double t,
                        const SimConfig& sim, double lane_width) {
    const Vehicle& host = cars[0];
    FrameRecord f;
    f.t = t;
    f.frame_index = index;
    f.host = {0.0, host.y, host.vx};
    f.payload.kind = PayloadKind::Synthetic;
    f.payload.size = sim.payload_bytes;
    f.raw_size = sim.payload_bytes;

    const int host_lane = lane_of(host.y, lane_width, sim.n_lanes);
    std::array<double, kNumRegions> best_dist;
    best_dist.fill(std::numeric_limits<double>::infinity());
    for (std::size_t i = 1; i < cars.size(); ++i) {
        const Vehicle& c = cars[i];
        const double x_rel = c.x - host.x;
        const int lane = lane_of(c.y, lane_width, sim.n_lanes);
        int region;  // 1-based
        const bool front = x_rel >= 0.0;
        if (lane > host_lane) {
            region = front ? 1 : 2;
        } else if (lane == host_lane) {
            region = front ? 3 : 4;
        } else {
            region = front ? 5 : 6;
        }
        const double dist = std::abs(x_rel);
        if (dist < best_dist[region - 1]) {
            best_dist[region - 1] = dist;
            f.neighbors[region - 1] = {x_rel, c.y, c.vx};
            f.neighbor_present[region - 1] = true;
        }
    }
    inject_sentinels(f, sim.n_lanes, lane_width);
    return f;
}

} // namespace

Trajectory generate(const SimConfig& sim, const GeometryConfig& geo, const SimObserver& observer) {
    sim.validate();
    geo.validate();
    const double lane_width = geo.lane_width;
    const double dt = 1.0 / sim.frame_rate;
    Rng rng(sim.seed);

    // Host starts mid-road; participants scatter around it with a minimum
    // same-lane spacing.
    std::vector<Vehicle> cars;
    Vehicle host;
    host.lane = sim.n_lanes / 2;
    host.y = (host.lane + 0.5) * lane_width;
    host.vx = rng.uniform(sim.desired_speed_min, sim.desired_speed_max);
    host.desired_speed = host.vx;
    cars.push_back(host);
    for (int i = 0; i < sim.n_participants; ++i) {
        Vehicle v;
        v.lane = static_cast<int>(rng.uniform_int(0, sim.n_lanes - 1));
        v.y = (v.lane + 0.5) * lane_width;
        v.vx = rng.uniform(sim.desired_speed_min, sim.desired_speed_max);
        v.desired_speed = v.vx;
        for (int attempt = 0; attempt < 40; ++attempt) {
            v.x = rng.uniform(-sim.spawn_range, sim.spawn_range);
            bool clear = std::abs(v.x) > 12.0;
            for (const Vehicle& other : cars) {
                if (lane_of(other.y, lane_width, sim.n_lanes) == v.lane &&
                    std::abs(other.x - v.x) < 22.0) {
                    clear = false;
                }
            }
            if (clear) break;
        }
        cars.push_back(v);
    }

    Trajectory traj;
    traj.header.frame_rate = sim.frame_rate;
    traj.header.n_lanes = sim.n_lanes;
    traj.header.lane_width = lane_width;
    traj.header.seed = sim.seed;
    traj.header.generator_config =
        json{{"n_lanes", sim.n_lanes},
             {"n_participants", sim.n_participants},
             {"duration", sim.duration},
             {"frame_rate", sim.frame_rate},
             {"seed", sim.seed},
             {"lane_change_rate", sim.lane_change_rate},
             {"brake_rate", sim.brake_rate},
             {"desired_speed_min", sim.desired_speed_min},
             {"desired_speed_max", sim.desired_speed_max},
             {"payload_bytes", sim.payload_bytes}}
            .dump();

    const auto total_frames = static_cast<std::int64_t>(sim.duration * sim.frame_rate);
    std::vector<VehicleTruth> truth(cars.size());
    const double lat_speed = std::min(sim.v_lat_max, lane_width / 2.5);

    for (std::int64_t step = 0; step < total_frames; ++step) {
        // Behavior decisions, fixed draw order for determinism.
        for (std::size_t i = 1; i < cars.size(); ++i) {
            Vehicle& c = cars[i];
            if (c.brake_frames == 0 && rng.bernoulli(sim.brake_rate * dt)) {
                c.brake_frames = static_cast<int>(rng.uniform_int(6, 14));
                c.brake_strength = rng.uniform(-sim.a_max, -4.6);
            }
            const bool changing = std::abs(c.y - (c.lane + 0.5) * lane_width) > 0.05;
            if (!changing && rng.bernoulli(sim.lane_change_rate * dt)) {
                const int dir = rng.bernoulli(0.5) ? 1 : -1;
                const int target = c.lane + dir;
                if (target >= 0 && target < sim.n_lanes) {
                    // Sideswipe guard plus a courtesy rule: no cutting close
                    // ahead of a clearly faster vehicle. Close cut-ins ahead
                    // of similar-speed traffic stay allowed.
                    bool clear = true;
                    for (std::size_t k = 0; k < cars.size(); ++k) {
                        if (k == i) continue;
                        if (lane_of(cars[k].y, lane_width, sim.n_lanes) != target) continue;
                        const double dx = cars[k].x - c.x;
                        if (std::abs(dx) < 6.5) clear = false;
                        // Closing-speed windows: the gap must outlast the
                        // lateral ramp with margin. Similar-speed close
                        // cut-ins stay possible.
                        const double closing_behind = cars[k].vx - c.vx;
                        if (dx < 0.0 && closing_behind > 0.5 && -dx < closing_behind * 4.0) {
                            clear = false;
                        }
                        const double closing_ahead = c.vx - cars[k].vx;
                        if (dx > 0.0 && closing_ahead > 0.5 && dx < closing_ahead * 4.0) {
                            clear = false;
                        }
                    }
                    if (clear) c.lane = target;
                }
            }
        }

        // Accelerations.
        for (std::size_t i = 0; i < cars.size(); ++i) {
            Vehicle& c = cars[i];
            const int leader = find_leader(cars, i, lane_width, sim.n_lanes);
            double a = follow_accel(c, leader >= 0 ? &cars[leader] : nullptr, geo.car_length);
            if (i == 0) {
                // The host never self-brakes at random.
                a = std::clamp(a, -sim.a_max, 2.5);
            } else {
                a = std::clamp(a, -sim.a_max, 2.5);
                if (c.brake_frames > 0) {
                    // An impulse forces braking but never overrides a deeper
                    // emergency response from the follow law.
                    a = std::min(a, c.brake_strength);
                    --c.brake_frames;
                }
                // Gentle cohesion toward the host neighborhood.
                const double drift = cars[0].x - c.x;
                c.desired_speed =
                    std::clamp(c.desired_speed + std::clamp(0.002 * drift, -0.05, 0.05),
                               sim.desired_speed_min - 4.0, sim.desired_speed_max + 4.0);
            }
            c.ax = a;
        }

        // Integration: x uses the pre-update speed so the per-step motion
        // bound |dx - vx dt| <= a_max dt^2 / 2 holds exactly.
        for (Vehicle& c : cars) {
            double dx = c.vx * dt + 0.5 * c.ax * dt * dt;
            if (c.vx + c.ax * dt < 0.0) {
                dx = c.vx * c.vx / (2.0 * std::max(1e-9, -c.ax));  // stops within the step
                c.vx = 0.0;
            } else {
                c.vx += c.ax * dt;
            }
            c.x += dx;
            const double target_y = (c.lane + 0.5) * lane_width;
            const double dy = std::clamp(target_y - c.y, -lat_speed * dt, lat_speed * dt);
            c.y += dy;
        }

        if (observer) {
            for (std::size_t i = 0; i < cars.size(); ++i) {
                truth[i] = {cars[i].x, cars[i].y, cars[i].vx, cars[i].ax};
            }
            observer(static_cast<double>(step) * dt, truth);
        }

        traj.frames.push_back(
            build_frame(cars, step, static_cast<double>(step) * dt, sim, lane_width));

        // Stop at the first host crash; the crash frame stays in the record.
        bool crashed = false;
        for (std::size_t i = 1; i < cars.size(); ++i) {
            if (std::abs(cars[i].x - cars[0].x) <= geo.car_length &&
                std::abs(cars[i].y - cars[0].y) <= geo.car_width) {
                crashed = true;
            }
        }
        if (crashed) break;
    }
    return traj;
}

void inject_event(Trajectory& trajectory, const EventLabel& event, std::int64_t at,
                  const GeometryConfig& geo) {
    auto& frames = trajectory.frames;
    if (at < 0 || at >= static_cast<std::int64_t>(frames.size())) {
        throw DataError("inject_event: index " + std::to_string(at) + " outside trajectory");
    }
    if (at == 0) throw DataError("inject_event: index 0 has no preceding frame");
    FrameRecord& prev = frames[at - 1];
    FrameRecord& cur = frames[at];

    const auto clear_neighbors = [&](FrameRecord& f) {
        f.neighbor_present.fill(false);
        inject_sentinels(f, trajectory.header.n_lanes, trajectory.header.lane_width);
    };

    switch (event.kind) {
        case EventKind::Normal: {
            clear_neighbors(prev);
            clear_neighbors(cur);
            cur.host.vx = prev.host.vx;  // no deceleration at `at`
            break;
        }
        case EventKind::HardBraking: {
            clear_neighbors(prev);
            clear_neighbors(cur);
            cur.host.vx = prev.host.vx + 1.25 * geo.hard_brake_threshold * geo.dt();
            if (cur.host.vx < 0.0) cur.host.vx = 0.0;
            break;
        }
        case EventKind::Cutin:
        case EventKind::Conflict: {
            const double range = event.cutin_range.value_or(
                event.kind == EventKind::Cutin ? 30.0 : 9.0);
            clear_neighbors(prev);
            clear_neighbors(cur);
            cur.host.vx = prev.host.vx;
            // Front-center occupant easing laterally into the host lane.
            VehicleState before{range, prev.host.y + 1.3, prev.host.vx};
            VehicleState now{range, cur.host.y + 1.0, cur.host.vx};
            prev.neighbors[2] = before;
            prev.neighbor_present[2] = true;
            cur.neighbors[2] = now;
            cur.neighbor_present[2] = true;
            break;
        }
        case EventKind::Crash: {
            clear_neighbors(cur);
            cur.neighbors[2] = {3.0, cur.host.y + 0.4, cur.host.vx * 0.5};
            cur.neighbor_present[2] = true;
            frames.resize(at + 1);  // trajectory truncates at the crash
            break;
        }
    }
}

} // namespace sbb
