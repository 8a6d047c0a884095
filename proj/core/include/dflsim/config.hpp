#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dflsim/scenario.hpp"

namespace dflsim {

/// Reads a JSON scenario file. Missing keys take their defaults, unknown keys
/// are rejected, relative paths resolve against the file's directory.
/// Throws ConfigError naming the offending key.
ScenarioConfig parse_config(const std::filesystem::path& path);

/// Same as parse_config for in-memory text.
ScenarioConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});

/// Constraint checks on an already built config. Throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

/// Canonical JSON: every field present, keys sorted, compact.
std::string config_to_json(const ScenarioConfig& cfg);

/// 16 hex digits; a pure function of config_to_json(cfg).
std::string scenario_id(const ScenarioConfig& cfg);

}  // namespace dflsim
