#include "sbb/model_file.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sbb/errors.hpp"

namespace sbb {

using nlohmann::json;

double ValueModel::normal_value() const {
    return -std::log2(priors.of(EventKind::Normal)) / denominator;
}

void ValueModel::validate() const {
    priors.validate();
    bounds.validate();
    if (!(denominator > 0.0)) throw ConfigError("value model: denominator must be > 0");
    if (range_model) range_model->validate();
}

void save_value_model(const std::filesystem::path& path, const ValueModel& model) {
    json j;
    j["sbb_model"] = 1;
    j["provenance"] = model.provenance;
    json priors;
    for (EventKind k : kAllEventKinds) priors[to_string(k)] = model.priors.of(k);
    j["priors"] = std::move(priors);
    j["priors_provenance"] =
        model.priors.provenance == EventPriors::Provenance::CorpusEstimated ? "corpus" : "loaded";
    j["value_denominator"] = model.denominator;
    if (model.range_model) {
        j["range_model"] = {{"family", to_string(model.range_model->family)},
                            {"params", model.range_model->params},
                            {"bic", model.range_model->bic},
                            {"samples", model.range_model->sample_count}};
    }
    j["feature_bounds"] = {
        {"min", std::vector<double>(model.bounds.min.begin(), model.bounds.min.end())},
        {"max", std::vector<double>(model.bounds.max.begin(), model.bounds.max.end())}};

    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file: " + path.string());
    out << j.dump(2) << '\n';
}

ValueModel load_value_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("model file " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("sbb_model").get<int>() != 1) {
            throw DataError("model file " + path.string() + ": unsupported version");
        }
        ValueModel model;
        model.provenance = j.value("provenance", std::string{});
        for (EventKind k : kAllEventKinds) {
            model.priors.set(k, j.at("priors").at(to_string(k)).get<double>());
        }
        model.priors.provenance = j.value("priors_provenance", std::string{"loaded"}) == "corpus"
                                      ? EventPriors::Provenance::CorpusEstimated
                                      : EventPriors::Provenance::Loaded;
        model.denominator = j.at("value_denominator").get<double>();
        if (j.contains("range_model")) {
            FittedRangeModel m;
            const std::string family = j.at("range_model").at("family").get<std::string>();
            bool found = false;
            for (DistFamily f : {DistFamily::Pareto, DistFamily::Exponential, DistFamily::F,
                                 DistFamily::Beta, DistFamily::Gamma}) {
                if (family == to_string(f)) {
                    m.family = f;
                    found = true;
                }
            }
            if (!found) throw DataError("model file: unknown family '" + family + "'");
            m.params = j.at("range_model").at("params").get<std::vector<double>>();
            m.bic = j.at("range_model").value("bic", 0.0);
            m.sample_count = j.at("range_model").value("samples", std::size_t{0});
            model.range_model = std::move(m);
        }
        const auto jmin = j.at("feature_bounds").at("min").get<std::vector<double>>();
        const auto jmax = j.at("feature_bounds").at("max").get<std::vector<double>>();
        if (jmin.size() != kFeatureDim || jmax.size() != kFeatureDim) {
            throw DataError("model file: feature bounds must have 20 components");
        }
        std::copy(jmin.begin(), jmin.end(), model.bounds.min.begin());
        std::copy(jmax.begin(), jmax.end(), model.bounds.max.begin());
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw DataError("model file " + path.string() + ": " + e.what());
    }
}

ValueModel reference_value_model(const GeometryConfig& geo) {
    ValueModel model;
    model.provenance = "reference";
    model.priors.provenance = EventPriors::Provenance::Loaded;
    model.priors.set(EventKind::Normal, 0.92);
    model.priors.set(EventKind::Cutin, 0.045);
    model.priors.set(EventKind::HardBraking, 0.035);
    model.priors.set(EventKind::Conflict, 0.0015);
    // Not published alongside the other priors; solved so the conflict value
    // normalizes to 0.72 exactly.
    model.priors.set(EventKind::Crash, 1.19e-4);
    model.denominator = value_denominator(model.priors);

    // Scaled-F inverse-range model placing ~2% of cut-ins beyond 100 m and
    // ~81.5% beyond 30 m, which reproduces the reference cut-in values
    // (~0.345 at 100 m, ~0.530 at 30 m).
    FittedRangeModel range;
    range.family = DistFamily::F;
    range.params = {31.0, 20.0, 0.022668128318425195};
    range.sample_count = 0;
    model.range_model = std::move(range);

    model.bounds = default_feature_bounds(geo);
    return model;
}

} // namespace sbb
