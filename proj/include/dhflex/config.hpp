#pragma once

#include <string>

#include "dhflex/engine.hpp"

namespace dhflex::config {

// Reads one JSON document. Relative input paths are resolved against the
// directory of the file. Unknown keys, wrong types and invalid values raise
// ConfigError naming the key.
engine::ScenarioConfig load(const std::string& path);
engine::ScenarioConfig parse(const std::string& json_text, const std::string& base_dir = ".");
std::string dump(const engine::ScenarioConfig& config);

}  // namespace dhflex::config
