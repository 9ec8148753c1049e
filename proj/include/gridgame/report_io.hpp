#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridgame/experiments.hpp"

namespace gridgame {

/// Long-format table, one row per (scheme, scheduler). Column order is fixed:
/// scenario, scheme, load, m, n, scheduler, power, network, loss, utilization,
/// total, normalized_power, fi, iterations. Cost columns are per task.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  nlohmann::json to_json() const;  // array of objects keyed by column, same cell text
};

Table report_table(const std::vector<ExperimentPoint> &points);
Table trace_table(const std::vector<double> &change_trace);
Table moments_table(const std::vector<NodeMoments> &moments);

/// Deterministic shortest round-trip formatting ("inf", "nan" for non-finite).
std::string format_number(double value);

/// Writes via a temporary file in the same directory and renames it into place.
void write_atomic(const std::filesystem::path &path, const std::string &contents);

}  // namespace gridgame
