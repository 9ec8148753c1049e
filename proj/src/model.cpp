#include "gridgame/model.hpp"

#include <cmath>
#include <sstream>

namespace gridgame {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleLoad: return "InfeasibleLoad";
    case ErrorCode::kMissingLink: return "MissingLink";
    case ErrorCode::kNonPositiveRate: return "NonPositiveRate";
    case ErrorCode::kInvalidParameter: return "InvalidParameter";
    case ErrorCode::kSingularShape: return "SingularShape";
    case ErrorCode::kUnstableNode: return "UnstableNode";
    case ErrorCode::kNonPositiveCapacity: return "NonPositiveCapacity";
    case ErrorCode::kNoRoot: return "NoRoot";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

ServiceDistribution ServiceDistribution::exponential(double mu) {
  const Moments m = exponential_moments(mu);
  ServiceDistribution d;
  d.kind = ServiceKind::kExponential;
  d.mu = mu;
  d.mean = m.mean;
  d.second_moment = m.second_moment;
  return d;
}

ServiceDistribution ServiceDistribution::bounded_pareto(const BoundedParetoParams &params) {
  const Moments m = bounded_pareto_moments(params);
  ServiceDistribution d;
  d.kind = ServiceKind::kBoundedPareto;
  d.pareto = params;
  d.mean = m.mean;
  d.second_moment = m.second_moment;
  return d;
}

Eigen::VectorXd GridConfig::arrival_rates() const {
  Eigen::VectorXd lambda(num_schedulers());
  for (Index i = 0; i < num_schedulers(); ++i) lambda(i) = schedulers[i].lambda;
  return lambda;
}

Eigen::VectorXd GridConfig::service_rates() const {
  Eigen::VectorXd mu(num_nodes());
  for (Index j = 0; j < num_nodes(); ++j) mu(j) = nodes[j].mu;
  return mu;
}

void GridConfig::set_default_links() {
  links.clear();
  links.reserve(schedulers.size() * nodes.size());
  for (Index i = 0; i < num_schedulers(); ++i) {
    for (Index j = 0; j < num_nodes(); ++j) links.push_back({i, j, 0.0, 1.0});
  }
}

namespace {

template <typename... Args>
std::string cat(const Args &...args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

void check_node(const NodeSpec &node, Index j, std::vector<Violation> &out) {
  if (!(node.mu > 0.0)) {
    out.push_back({ErrorCode::kNonPositiveRate, cat("node ", j, ": mu must be positive")});
  }
  if (!(node.mttf > 0.0)) {
    out.push_back({ErrorCode::kInvalidParameter, cat("node ", j, ": mttf must be positive")});
  }
  if (!(node.disk_capacity > 0.0)) {
    out.push_back({ErrorCode::kInvalidParameter, cat("node ", j, ": disk_capacity must be positive")});
  }
  if (!(node.compute_capacity > 0.0)) {
    out.push_back(
        {ErrorCode::kInvalidParameter, cat("node ", j, ": compute_capacity must be positive")});
  }
  if (node.p_busy < 0.0 || node.p_idle_wait < 0.0 || node.c_r < 0.0 || node.c_f < 0.0 ||
      node.rho_util < 0.0) {
    out.push_back({ErrorCode::kInvalidParameter, cat("node ", j, ": cost parameters must be >= 0")});
  }
  const ServiceDistribution &s = node.service;
  if (!(s.mean > 0.0)) {
    out.push_back({ErrorCode::kInvalidParameter, cat("node ", j, ": service mean must be positive")});
    return;
  }
  if (s.second_moment < s.mean * s.mean * (1.0 - 1e-12)) {
    out.push_back({ErrorCode::kInvalidParameter,
                   cat("node ", j, ": service second moment below mean squared")});
  }
  if (node.mu > 0.0 && std::abs(s.mean * node.mu - 1.0) > 1e-9) {
    out.push_back({ErrorCode::kInvalidParameter,
                   cat("node ", j, ": service mean ", s.mean, " does not equal 1/mu = ", 1.0 / node.mu)});
  }
}

}  // namespace

std::vector<Violation> check(const GridConfig &config) {
  std::vector<Violation> out;
  const Index n = config.num_schedulers();
  const Index m = config.num_nodes();
  if (n == 0) out.push_back({ErrorCode::kEmptyInput, "no schedulers"});
  if (m == 0) out.push_back({ErrorCode::kEmptyInput, "no nodes"});

  for (Index j = 0; j < m; ++j) check_node(config.nodes[j], j, out);
  for (Index i = 0; i < n; ++i) {
    const SchedulerSpec &s = config.schedulers[i];
    if (!(s.lambda > 0.0)) {
      out.push_back({ErrorCode::kNonPositiveRate, cat("scheduler ", i, ": lambda must be positive")});
    }
    if (!(s.bits > 0.0) || !(s.compute_demand > 0.0)) {
      out.push_back({ErrorCode::kInvalidParameter,
                     cat("scheduler ", i, ": bits and compute_demand must be positive")});
    }
  }

  const CostConstants &c = config.constants;
  if (!(c.c_p > 0.0)) out.push_back({ErrorCode::kInvalidParameter, "c_p must be positive"});
  if (c.c_bw < 0.0 || c.c_n < 0.0) {
    out.push_back({ErrorCode::kInvalidParameter, "c_bw and c_n must be >= 0"});
  }

  // Every (scheduler, node) pair exactly once, stored at index i * m + j.
  std::vector<int> seen(static_cast<std::size_t>(n * m), 0);
  bool ordered = config.links.size() == seen.size();
  for (std::size_t idx = 0; idx < config.links.size(); ++idx) {
    const LinkSpec &l = config.links[idx];
    if (l.scheduler < 0 || l.scheduler >= n || l.node < 0 || l.node >= m) {
      out.push_back({ErrorCode::kMissingLink,
                     cat("link (", l.scheduler, ",", l.node, ") references an unknown endpoint")});
      ordered = false;
      continue;
    }
    ++seen[static_cast<std::size_t>(l.scheduler * m + l.node)];
    if (static_cast<std::size_t>(l.scheduler * m + l.node) != idx) ordered = false;
    if (l.delay < 0.0 || !(l.bandwidth > 0.0)) {
      out.push_back({ErrorCode::kInvalidParameter,
                     cat("link (", l.scheduler, ",", l.node, "): need delay >= 0, bandwidth > 0")});
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      const int count = seen[static_cast<std::size_t>(i * m + j)];
      if (count == 0) {
        out.push_back({ErrorCode::kMissingLink, cat("link (", i, ",", j, ") missing")});
      } else if (count > 1) {
        out.push_back({ErrorCode::kMissingLink, cat("link (", i, ",", j, ") given ", count, " times")});
      }
    }
  }
  if (!ordered && out.empty()) {
    out.push_back({ErrorCode::kMissingLink, "links are not stored in scheduler-major order"});
  }

  if (n > 0 && m > 0) {
    const double demand = config.arrival_rates().sum();
    const double supply = config.service_rates().sum();
    if (!(demand < supply)) {
      out.push_back({ErrorCode::kInfeasibleLoad,
                     cat("total arrival rate ", demand, " >= total service rate ", supply)});
    }
  }
  return out;
}

namespace {

std::string summarize(const std::vector<Violation> &violations) {
  std::ostringstream os;
  os << violations.size() << " constraint violation(s)";
  for (const auto &v : violations) os << "\n  " << to_string(v.code) << ": " << v.message;
  return os.str();
}

ErrorCode first_code(const std::vector<Violation> &violations) {
  return violations.empty() ? ErrorCode::kInvalidParameter : violations.front().code;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(first_code(violations), summarize(violations)), violations_(std::move(violations)) {}

const GridConfig &validate(const GridConfig &config) {
  auto violations = check(config);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return config;
}

double system_load(const GridConfig &config) {
  return config.arrival_rates().sum() / config.service_rates().sum();
}

GridConfig scale_to_load(GridConfig config, double target) {
  if (!(target > 0.0 && target < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "target load must lie in (0, 1)");
  }
  const double factor = target / system_load(config);
  for (auto &s : config.schedulers) s.lambda *= factor;
  return config;
}

std::vector<Violation> check_strategy(const StrategyMatrix &strategy, const GridConfig &config) {
  std::vector<Violation> out;
  const Index n = config.num_schedulers();
  const Index m = config.num_nodes();
  if (strategy.rows() != n || strategy.cols() != m) {
    out.push_back({ErrorCode::kShapeMismatch,
                   cat("strategy is ", strategy.rows(), "x", strategy.cols(), ", expected ", n, "x", m)});
    return out;
  }
  for (Index i = 0; i < n; ++i) {
    if ((strategy.row(i).array() < 0.0).any()) {
      out.push_back({ErrorCode::kInfeasible, cat("row ", i, " has a negative entry")});
    }
    const double sum = strategy.row(i).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      out.push_back({ErrorCode::kInfeasible, cat("row ", i, " sums to ", sum)});
    }
  }
  const Eigen::VectorXd load = strategy.transpose() * config.arrival_rates();
  for (Index j = 0; j < m; ++j) {
    if (!(load(j) * config.nodes[j].service.mean < 1.0 - kStabilityMargin)) {
      out.push_back({ErrorCode::kUnstableNode,
                     cat("node ", j, " load ", load(j), " exceeds capacity ", config.nodes[j].mu)});
    }
  }
  return out;
}

}  // namespace gridgame
