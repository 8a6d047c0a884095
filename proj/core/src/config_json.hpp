#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "dflsim/scenario.hpp"

namespace dflsim::detail {

ScenarioConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_as_json(const ScenarioConfig& cfg);

}  // namespace dflsim::detail
