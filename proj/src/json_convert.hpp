#pragma once

#include <json.hpp>

#include "nhrmt/ensembles.hpp"
#include "nhrmt/errors.hpp"

namespace nhrmt::detail {

inline nlohmann::json ensemble_to_json(const EnsembleSpec& e) {
    nlohmann::json j{{"ensemble", to_string(e.cls)}, {"n", e.n}, {"seed", e.seed}};
    j["tau"] = e.tau ? nlohmann::json(*e.tau) : nlohmann::json(nullptr);
    return j;
}

inline EnsembleSpec ensemble_from_json(const nlohmann::json& j) {
    EnsembleSpec e;
    try {
        e.cls = parse_ensemble(j.at("ensemble").get<std::string>());
        e.n = j.at("n").get<int>();
        e.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("tau") && !j["tau"].is_null()) e.tau = j["tau"].get<double>();
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("ensemble description: ") + ex.what());
    }
    return e;
}

}  // namespace nhrmt::detail
