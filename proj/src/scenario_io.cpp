#include "gridgame/scenario_io.hpp"

#include <algorithm>
#include <fstream>

#include "gridgame/error.hpp"

namespace gridgame {

using nlohmann::json;

namespace {

double number_or(const json &obj, const char *key, double fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::kParse, std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

double required_number(const json &obj, const char *key, const std::string &where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw Error(ErrorCode::kParse, where + ": missing numeric field '" + key + "'");
  }
  return it->get<double>();
}

const json &required_array(const json &doc, const char *key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    throw Error(ErrorCode::kParse, std::string("scenario needs an array '") + key + "'");
  }
  return *it;
}

NodeSpec parse_node(const json &obj, Index position) {
  const std::string where = "nodes[" + std::to_string(position) + "]";
  if (!obj.is_object()) throw Error(ErrorCode::kParse, where + " must be an object");
  NodeSpec node;
  node.id = static_cast<Index>(number_or(obj, "id", static_cast<double>(position)));
  node.p_busy = number_or(obj, "p_busy", 1.0);
  node.p_idle_wait = number_or(obj, "p_idle_wait", 1.0);
  node.c_r = number_or(obj, "c_r", 1.0);
  node.mttf = number_or(obj, "mttf", 1.0);
  node.c_f = number_or(obj, "c_f", 1.0);
  node.rho_util = number_or(obj, "rho_util", 1.0);
  node.compute_capacity = number_or(obj, "compute_capacity", 1.0);
  node.disk_capacity = number_or(obj, "disk_capacity", 1.0);

  const auto service = obj.find("service");
  const std::string kind =
      service == obj.end() ? "exponential" : service->value("kind", std::string("exponential"));
  if (kind == "exponential") {
    node.mu = required_number(obj, "mu", where);
    // An invalid rate is reported by validation, not here.
    if (node.mu > 0.0) {
      node.service = ServiceDistribution::exponential(node.mu);
    } else {
      node.service.kind = ServiceKind::kExponential;
    }
  } else if (kind == "bounded_pareto") {
    const BoundedParetoParams params{required_number(*service, "k", where + ".service"),
                                     required_number(*service, "p_max", where + ".service"),
                                     required_number(*service, "shape", where + ".service")};
    node.service = ServiceDistribution::bounded_pareto(params);
    node.mu = number_or(obj, "mu", 1.0 / node.service.mean);
  } else {
    throw Error(ErrorCode::kParse, where + ": unknown service kind '" + kind + "'");
  }
  return node;
}

SchedulerSpec parse_scheduler(const json &obj, Index position) {
  const std::string where = "schedulers[" + std::to_string(position) + "]";
  if (!obj.is_object()) throw Error(ErrorCode::kParse, where + " must be an object");
  SchedulerSpec s;
  s.id = static_cast<Index>(number_or(obj, "id", static_cast<double>(position)));
  s.lambda = required_number(obj, "lambda", where);
  s.bits = number_or(obj, "bits", 1.0);
  s.compute_demand = number_or(obj, "compute_demand", 1.0);
  return s;
}

}  // namespace

Scenario parse_scenario(const json &doc, const std::string &fallback_name) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "scenario must be a JSON object");
  Scenario out;
  out.name = doc.value("name", fallback_name);
  GridConfig &config = out.config;

  const json &nodes = required_array(doc, "nodes");
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    config.nodes.push_back(parse_node(nodes[j], static_cast<Index>(j)));
  }
  const json &schedulers = required_array(doc, "schedulers");
  for (std::size_t i = 0; i < schedulers.size(); ++i) {
    config.schedulers.push_back(parse_scheduler(schedulers[i], static_cast<Index>(i)));
  }

  if (const auto it = doc.find("constants"); it != doc.end()) {
    config.constants.c_p = number_or(*it, "c_p", 1.0);
    config.constants.c_bw = number_or(*it, "c_bw", 1.0);
    config.constants.c_n = number_or(*it, "c_n", 1.0);
  }

  if (const auto it = doc.find("links"); it == doc.end()) {
    config.set_default_links();
  } else {
    if (!it->is_array()) throw Error(ErrorCode::kParse, "'links' must be an array");
    for (const json &obj : *it) {
      LinkSpec link;
      link.scheduler = static_cast<Index>(required_number(obj, "scheduler", "link"));
      link.node = static_cast<Index>(required_number(obj, "node", "link"));
      link.delay = number_or(obj, "delay", 0.0);
      link.bandwidth = number_or(obj, "bandwidth", 1.0);
      config.links.push_back(link);
    }
    // Canonical scheduler-major order; gaps and duplicates are left for validation.
    std::stable_sort(config.links.begin(), config.links.end(),
                     [](const LinkSpec &a, const LinkSpec &b) {
                       return a.scheduler != b.scheduler ? a.scheduler < b.scheduler
                                                         : a.node < b.node;
                     });
  }
  return out;
}

Scenario load_scenario(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open scenario file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return parse_scenario(doc, path.stem().string());
}

json to_json(const Scenario &scenario) {
  const GridConfig &c = scenario.config;
  json doc;
  doc["name"] = scenario.name;
  doc["nodes"] = json::array();
  for (const NodeSpec &n : c.nodes) {
    json service;
    if (n.service.kind == ServiceKind::kBoundedPareto) {
      service = {{"kind", "bounded_pareto"},
                 {"k", n.service.pareto.k},
                 {"p_max", n.service.pareto.p_max},
                 {"shape", n.service.pareto.shape}};
    } else {
      service = {{"kind", "exponential"}};
    }
    doc["nodes"].push_back({{"id", n.id},
                            {"mu", n.mu},
                            {"service", service},
                            {"p_busy", n.p_busy},
                            {"p_idle_wait", n.p_idle_wait},
                            {"c_r", n.c_r},
                            {"mttf", n.mttf},
                            {"c_f", n.c_f},
                            {"rho_util", n.rho_util},
                            {"compute_capacity", n.compute_capacity},
                            {"disk_capacity", n.disk_capacity}});
  }
  doc["schedulers"] = json::array();
  for (const SchedulerSpec &s : c.schedulers) {
    doc["schedulers"].push_back(
        {{"id", s.id}, {"lambda", s.lambda}, {"bits", s.bits}, {"compute_demand", s.compute_demand}});
  }
  doc["links"] = json::array();
  for (const LinkSpec &l : c.links) {
    doc["links"].push_back(
        {{"scheduler", l.scheduler}, {"node", l.node}, {"delay", l.delay}, {"bandwidth", l.bandwidth}});
  }
  doc["constants"] = {{"c_p", c.constants.c_p}, {"c_bw", c.constants.c_bw}, {"c_n", c.constants.c_n}};
  return doc;
}

}  // namespace gridgame
