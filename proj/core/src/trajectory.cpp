#include "sbb/trajectory.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sbb/errors.hpp"

namespace sbb {

using nlohmann::json;

VehicleState absent_neighbor_state(int region, double host_y, int n_lanes, double lane_width) {
    // Regions 1,2 sit one lane left of the host (larger y), 3,4 in the host
    // lane, 5,6 one lane right; clamped at the road edges.
    const int host_lane =
        std::clamp(static_cast<int>(std::floor(host_y / lane_width)), 0, n_lanes - 1);
    int lane = host_lane;
    if (region == 1 || region == 2) lane = std::min(host_lane + 1, n_lanes - 1);
    if (region == 5 || region == 6) lane = std::max(host_lane - 1, 0);
    VehicleState s;
    s.x = kAbsentNeighborX;
    s.vx = 0.0;
    s.y = (lane + 0.5) * lane_width;
    return s;
}

void inject_sentinels(FrameRecord& frame, int n_lanes, double lane_width) {
    for (int r = 0; r < kNumRegions; ++r) {
        if (!frame.neighbor_present[r]) {
            frame.neighbors[r] = absent_neighbor_state(r + 1, frame.host.y, n_lanes, lane_width);
        }
    }
}

namespace {

json header_to_json(const TrajectoryHeader& h) {
    json j{{"sbb_trajectory", h.version},
           {"frame_rate", h.frame_rate},
           {"n_lanes", h.n_lanes},
           {"lane_width", h.lane_width},
           {"seed", h.seed}};
    if (!h.generator_config.empty()) {
        j["generator_config"] = json::parse(h.generator_config);
    }
    return j;
}

json frame_to_json(const FrameRecord& f) {
    json j;
    j["t"] = f.t;
    j["i"] = f.frame_index;
    j["host"] = {{"x", f.host.x}, {"y", f.host.y}, {"vx", f.host.vx}};
    json nbs = json::array();
    for (int r = 0; r < kNumRegions; ++r) {
        if (!f.neighbor_present[r]) continue;  // absent slots omitted on disk
        const VehicleState& nb = f.neighbors[r];
        nbs.push_back({{"region", r + 1}, {"x", nb.x}, {"y", nb.y}, {"vx", nb.vx}});
    }
    j["neighbors"] = std::move(nbs);
    json payload{{"kind", f.payload.kind == PayloadKind::Image ? "image" : "synthetic"},
                 {"size", f.payload.size}};
    if (f.payload.kind == PayloadKind::Image) payload["path"] = f.payload.path;
    j["payload"] = std::move(payload);
    return j;
}

FrameRecord frame_from_json(const json& j, int n_lanes, double lane_width, int line_no) {
    const auto fail = [line_no](const std::string& what) -> DataError {
        return DataError("trajectory line " + std::to_string(line_no) + ": " + what);
    };
    FrameRecord f;
    try {
        f.t = j.at("t").get<double>();
        f.frame_index = j.at("i").get<std::int64_t>();
        const json& host = j.at("host");
        f.host.x = host.at("x").get<double>();
        f.host.y = host.at("y").get<double>();
        f.host.vx = host.at("vx").get<double>();
        for (const json& nb : j.at("neighbors")) {
            const int region = nb.at("region").get<int>();
            if (region < 1 || region > kNumRegions) {
                throw fail("region out of range: " + std::to_string(region));
            }
            if (f.neighbor_present[region - 1]) {
                throw fail("duplicate region " + std::to_string(region));
            }
            f.neighbor_present[region - 1] = true;
            VehicleState& s = f.neighbors[region - 1];
            s.x = nb.at("x").get<double>();
            s.y = nb.at("y").get<double>();
            s.vx = nb.at("vx").get<double>();
        }
        const json& payload = j.at("payload");
        const std::string kind = payload.at("kind").get<std::string>();
        if (kind == "image") {
            f.payload.kind = PayloadKind::Image;
            f.payload.path = payload.at("path").get<std::string>();
        } else if (kind == "synthetic") {
            f.payload.kind = PayloadKind::Synthetic;
        } else {
            throw fail("unknown payload kind '" + kind + "'");
        }
        f.payload.size = payload.at("size").get<std::uint64_t>();
        f.raw_size = f.payload.size;
    } catch (const json::exception& e) {
        throw fail(e.what());
    }
    if (f.raw_size == 0) throw fail("raw_size must be > 0");
    inject_sentinels(f, n_lanes, lane_width);
    return f;
}

} // namespace

void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for write: " + path.string());
    out << header_to_json(trajectory.header).dump() << '\n';
    for (const FrameRecord& f : trajectory.frames) {
        out << frame_to_json(f).dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open trajectory: " + path.string());
    Trajectory traj;
    std::string line;
    int line_no = 0;
    std::int64_t prev_index = -1;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("trajectory line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!have_header && j.contains("sbb_trajectory")) {
            TrajectoryHeader& h = traj.header;
            h.version = j.at("sbb_trajectory").get<int>();
            h.frame_rate = j.value("frame_rate", h.frame_rate);
            h.n_lanes = j.value("n_lanes", h.n_lanes);
            h.lane_width = j.value("lane_width", h.lane_width);
            h.seed = j.value("seed", h.seed);
            if (j.contains("generator_config")) {
                h.generator_config = j.at("generator_config").dump();
            }
            have_header = true;
            continue;
        }
        FrameRecord f =
            frame_from_json(j, traj.header.n_lanes, traj.header.lane_width, line_no);
        if (f.frame_index <= prev_index) {
            throw DataError("trajectory line " + std::to_string(line_no) +
                            ": frame_index must strictly increase");
        }
        prev_index = f.frame_index;
        traj.frames.push_back(std::move(f));
    }
    return traj;
}

} // namespace sbb
