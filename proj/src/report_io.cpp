#include "gridgame/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridgame/error.hpp"

namespace gridgame {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string Table::to_csv() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto &row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  return os.str();
}

nlohmann::json Table::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto &row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < columns.size(); ++c) obj[columns[c]] = row[c];
    out.push_back(std::move(obj));
  }
  return out;
}

namespace {

void append_report(Table &table, const ExperimentReport &report) {
  for (std::size_t k = 0; k < report.per_scheduler.size(); ++k) {
    const SchedulerCosts &c = report.per_scheduler[k];
    const double normalized = k < report.normalized.size() ? report.normalized[k].power
                                                           : std::nan("");
    table.rows.push_back({report.scenario,
                          std::string(to_string(report.scheme)),
                          format_number(report.load),
                          std::to_string(report.m),
                          std::to_string(report.n),
                          std::to_string(c.scheduler),
                          format_number(c.per_task.power),
                          format_number(c.per_task.network),
                          format_number(c.per_task.loss),
                          format_number(c.per_task.utilization),
                          format_number(c.per_task.total),
                          format_number(normalized),
                          format_number(report.fairness),
                          std::to_string(report.iterations)});
  }
}

}  // namespace

Table report_table(const std::vector<ExperimentPoint> &points) {
  Table table;
  table.columns = {"scenario", "scheme", "load",  "m",           "n",     "scheduler",        "power",
                   "network",  "loss",   "utilization", "total", "normalized_power", "fi",
                   "iterations"};
  for (const auto &p : points) {
    append_report(table, p.game);
    append_report(table, p.average);
  }
  return table;
}

Table trace_table(const std::vector<double> &change_trace) {
  Table table;
  table.columns = {"iteration", "change"};
  for (std::size_t k = 0; k < change_trace.size(); ++k) {
    table.rows.push_back({std::to_string(k + 1), format_number(change_trace[k])});
  }
  return table;
}

Table moments_table(const std::vector<NodeMoments> &moments) {
  Table table;
  table.columns = {"node", "k", "p_max", "shape", "mean", "second_moment"};
  for (const auto &m : moments) {
    table.rows.push_back({std::to_string(m.node), format_number(m.params.k),
                          format_number(m.params.p_max), format_number(m.params.shape),
                          format_number(m.moments.mean), format_number(m.moments.second_moment)});
  }
  return table;
}

void write_atomic(const std::filesystem::path &path, const std::string &contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInvalidParameter, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::kInvalidParameter, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace gridgame
