#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gridgame/model.hpp"

namespace gridgame {

struct Scenario {
  std::string name;
  GridConfig config;
};

/// Builds a config from a scenario document with top-level keys `nodes`,
/// `schedulers`, `links` (optional) and `constants`. Does not validate.
/// Throws Error(kParse) on malformed input.
Scenario parse_scenario(const nlohmann::json &doc, const std::string &fallback_name = "scenario");

Scenario load_scenario(const std::filesystem::path &path);

nlohmann::json to_json(const Scenario &scenario);

}  // namespace gridgame
