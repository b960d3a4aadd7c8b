#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fusim/ahp.hpp"
#include "fusim/select_types.hpp"
#include "fusim/sim.hpp"

namespace fusim {

nlohmann::json affinity_to_json(const AffinityMatrix& affinity);
AffinityMatrix affinity_from_json(const nlohmann::json& j);

nlohmann::json plan_to_json(const FusionPlan& plan);
FusionPlan plan_from_json(const nlohmann::json& j);

nlohmann::json metrics_to_json(const ScenarioMetrics& metrics);
std::string metrics_to_csv(const ScenarioMetrics& metrics);

nlohmann::json scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fusim
