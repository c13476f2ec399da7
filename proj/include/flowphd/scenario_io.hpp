#pragma once

#include "flowphd/sim.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace flowphd {

/// Parses the scenario text format (see README). Unknown keys, missing
/// mandatory keys and out-of-range values raise ConfigError with the
/// offending key and line number.
ScenarioConfig parse_scenario_text(std::string_view text, std::string_view source_name = "<string>");

ScenarioConfig parse_scenario_file(const std::filesystem::path& path);

/// Canonical text form; parse(write(c)) reproduces c exactly.
std::string write_scenario(const ScenarioConfig& config);

void write_scenario_file(const ScenarioConfig& config, const std::filesystem::path& path);

}  // namespace flowphd
