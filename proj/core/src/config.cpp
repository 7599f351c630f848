#include <fstream>

#include <nlohmann/json.hpp>

#include "sbb/errors.hpp"
#include "sbb/pipeline.hpp"

namespace sbb {

using nlohmann::json;

void PipelineConfig::validate() const {
    geometry.validate();
    tracker.validate();
    weights.validate();
    curve.validate();
    storage.validate();
    value.validate();
    if (model_file.empty()) throw ConfigError("config: model_file is required");
    if (!std::filesystem::exists(model_file)) {
        throw ConfigError("config: model file does not exist: " + model_file);
    }
    if (trajectory_file.empty() == !sim.has_value()) {
        throw ConfigError("config: exactly one of trajectory_file or sim must be set");
    }
    if (!trajectory_file.empty() && !std::filesystem::exists(trajectory_file)) {
        throw ConfigError("config: trajectory file does not exist: " + trajectory_file);
    }
    if (sim) sim->validate();
}

namespace {

json geometry_to_json(const GeometryConfig& g) {
    return json{{"lane_width", g.lane_width},
                {"car_width", g.car_width},
                {"car_length", g.car_length},
                {"proximity_front", g.proximity_front},
                {"proximity_rear", g.proximity_rear},
                {"hard_brake_threshold", g.hard_brake_threshold},
                {"frame_rate", g.frame_rate},
                {"n_lanes", g.n_lanes}};
}

void geometry_from_json(const json& j, GeometryConfig& g) {
    g.lane_width = j.value("lane_width", g.lane_width);
    g.car_width = j.value("car_width", g.car_width);
    g.car_length = j.value("car_length", g.car_length);
    g.proximity_front = j.value("proximity_front", g.proximity_front);
    g.proximity_rear = j.value("proximity_rear", g.proximity_rear);
    g.hard_brake_threshold = j.value("hard_brake_threshold", g.hard_brake_threshold);
    g.frame_rate = j.value("frame_rate", g.frame_rate);
    g.n_lanes = j.value("n_lanes", g.n_lanes);
}

json sim_to_json(const SimConfig& s) {
    return json{{"n_lanes", s.n_lanes},
                {"n_participants", s.n_participants},
                {"duration", s.duration},
                {"frame_rate", s.frame_rate},
                {"seed", s.seed},
                {"lane_change_rate", s.lane_change_rate},
                {"brake_rate", s.brake_rate},
                {"desired_speed_min", s.desired_speed_min},
                {"desired_speed_max", s.desired_speed_max},
                {"a_max", s.a_max},
                {"v_lat_max", s.v_lat_max},
                {"spawn_range", s.spawn_range},
                {"payload_bytes", s.payload_bytes}};
}

void sim_from_json(const json& j, SimConfig& s) {
    s.n_lanes = j.value("n_lanes", s.n_lanes);
    s.n_participants = j.value("n_participants", s.n_participants);
    s.duration = j.value("duration", s.duration);
    s.frame_rate = j.value("frame_rate", s.frame_rate);
    s.seed = j.value("seed", s.seed);
    s.lane_change_rate = j.value("lane_change_rate", s.lane_change_rate);
    s.brake_rate = j.value("brake_rate", s.brake_rate);
    s.desired_speed_min = j.value("desired_speed_min", s.desired_speed_min);
    s.desired_speed_max = j.value("desired_speed_max", s.desired_speed_max);
    s.a_max = j.value("a_max", s.a_max);
    s.v_lat_max = j.value("v_lat_max", s.v_lat_max);
    s.spawn_range = j.value("spawn_range", s.spawn_range);
    s.payload_bytes = j.value("payload_bytes", s.payload_bytes);
}

} // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    PipelineConfig c;
    try {
        if (j.contains("geometry")) geometry_from_json(j.at("geometry"), c.geometry);
        if (j.contains("tracker")) {
            const json& t = j.at("tracker");
            c.tracker.t_maj = t.value("t_maj", c.tracker.t_maj);
            c.tracker.t_wait = t.value("t_wait", c.tracker.t_wait);
            c.tracker.min_pre = t.value("min_pre", c.tracker.min_pre);
            c.tracker.xi0 = t.value("xi0", c.tracker.xi0);
        }
        if (j.contains("weights")) {
            c.weights.eta = j.at("weights").value("eta", c.weights.eta);
            c.weights.zeta = j.at("weights").value("zeta", c.weights.zeta);
        }
        if (j.contains("curve")) {
            c.curve.a1 = j.at("curve").value("a1", c.curve.a1);
            c.curve.a2 = j.at("curve").value("a2", c.curve.a2);
            c.curve.a3 = j.at("curve").value("a3", c.curve.a3);
        }
        if (j.contains("storage")) {
            c.storage.budget = j.at("storage").value("budget", c.storage.budget);
            c.storage.aging = j.at("storage").value("aging", c.storage.aging);
        }
        if (j.contains("value")) {
            c.value.sigma_f = j.at("value").value("sigma_f", c.value.sigma_f);
        }
        c.model_file = j.value("model_file", std::string{});
        const std::string comp = j.value("compressor", std::string{"synthetic"});
        if (comp == "synthetic") {
            c.compressor = CompressorKind::Synthetic;
        } else if (comp == "jpeg") {
            c.compressor = CompressorKind::Jpeg;
        } else {
            throw ConfigError("config: unknown compressor '" + comp + "'");
        }
        c.coupled_lbo = j.value("coupled_lbo", false);
        c.trajectory_file = j.value("trajectory_file", std::string{});
        if (j.contains("sim")) {
            SimConfig s;
            sim_from_json(j.at("sim"), s);
            c.sim = s;
        }
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return c;
}

void save_pipeline_config(const std::filesystem::path& path, const PipelineConfig& c) {
    json j;
    j["geometry"] = geometry_to_json(c.geometry);
    j["tracker"] = {{"t_maj", c.tracker.t_maj},
                    {"t_wait", c.tracker.t_wait},
                    {"min_pre", c.tracker.min_pre},
                    {"xi0", c.tracker.xi0},
                    {"v_normal", c.tracker.v_normal}};
    j["weights"] = {{"eta", c.weights.eta}, {"zeta", c.weights.zeta}};
    j["curve"] = {{"a1", c.curve.a1}, {"a2", c.curve.a2}, {"a3", c.curve.a3}};
    j["storage"] = {{"budget", c.storage.budget}, {"aging", c.storage.aging}};
    j["value"] = {{"sigma_f", c.value.sigma_f}};
    j["model_file"] = c.model_file;
    j["compressor"] = c.compressor == CompressorKind::Jpeg ? "jpeg" : "synthetic";
    j["coupled_lbo"] = c.coupled_lbo;
    if (!c.trajectory_file.empty()) j["trajectory_file"] = c.trajectory_file;
    if (c.sim) j["sim"] = sim_to_json(*c.sim);

    std::ofstream out(path);
    if (!out) throw DataError("cannot write config: " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace sbb
