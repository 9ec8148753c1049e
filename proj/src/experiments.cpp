#include "gridgame/experiments.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "gridgame/error.hpp"

namespace gridgame {

namespace {

constexpr double kDefaultLoad = 0.2;

// Prefix of the first `count` nodes, links included.
GridConfig take_nodes(const GridConfig &config, Index count) {
  if (count < 1 || count > config.num_nodes()) {
    throw Error(ErrorCode::kInvalidParameter, "node count outside the scenario's node table");
  }
  GridConfig out = config;
  out.nodes.resize(static_cast<std::size_t>(count));
  out.links.clear();
  for (Index i = 0; i < config.num_schedulers(); ++i) {
    for (Index j = 0; j < count; ++j) out.links.push_back(config.link(i, j));
  }
  return out;
}

// `count` copies of scheduler 0 (and its links) splitting `total` arrival rate evenly.
GridConfig equal_schedulers(const GridConfig &config, Index count, double total) {
  if (count < 1) throw Error(ErrorCode::kInvalidParameter, "scheduler count must be positive");
  GridConfig out = config;
  out.schedulers.clear();
  out.links.clear();
  for (Index i = 0; i < count; ++i) {
    SchedulerSpec s = config.schedulers.front();
    s.id = i;
    s.lambda = total / static_cast<double>(count);
    out.schedulers.push_back(s);
    for (Index j = 0; j < config.num_nodes(); ++j) {
      LinkSpec l = config.link(0, j);
      l.scheduler = i;
      out.links.push_back(l);
    }
  }
  return out;
}

ExperimentReport evaluate(const std::string &scenario, Scheme scheme, const GridConfig &config,
                          const StrategyMatrix &strategy, const ExperimentOptions &options) {
  ExperimentReport r;
  r.scenario = scenario;
  r.scheme = scheme;
  r.load = system_load(config);
  r.m = config.num_nodes();
  r.n = config.num_schedulers();
  r.seed = options.seed;
  r.strategy = strategy;
  r.feasible = check_strategy(strategy, config).empty();
  std::vector<double> powers;
  for (Index i = 0; i < config.num_schedulers(); ++i) {
    SchedulerCosts c;
    c.scheduler = config.schedulers[i].id;
    if (r.feasible) {
      c.rate = scheduler_cost(i, strategy, config);
      c.per_task = per_task_costs(c.rate, config.schedulers[i].lambda);
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      c.rate = {inf, inf, inf, inf, inf};
      c.per_task = c.rate;
    }
    powers.push_back(c.per_task.power);
    r.per_scheduler.push_back(c);
  }
  r.fairness = r.feasible ? fairness_index(powers) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double mean_of(const std::vector<SchedulerCosts> &rows, double CostBreakdown::*field) {
  double sum = 0.0;
  for (const auto &row : rows) sum += row.per_task.*field;
  return sum / static_cast<double>(rows.size());
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::kGame ? "game" : "average";
}

double ExperimentReport::mean_per_task_power() const {
  return mean_of(per_scheduler, &CostBreakdown::power);
}

double fairness_index(std::span<const double> costs) {
  if (costs.empty()) throw Error(ErrorCode::kEmptyInput, "fairness index of an empty set");
  const double count = static_cast<double>(costs.size());
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / count;
  double var = 0.0;
  for (double c : costs) var += (c - mean) * (c - mean);
  var /= count;
  return mean * mean / (mean * mean + var);
}

CostBreakdown per_task_costs(const CostBreakdown &rate, double lambda) {
  CostBreakdown out;
  out.power = rate.power / lambda;
  out.network = rate.network;
  out.loss = rate.loss / lambda;
  out.utilization = rate.utilization / lambda;
  out.total = out.power + out.network + out.loss + out.utilization;
  return out;
}

void normalize(ExperimentPoint &point) {
  const auto &rows = point.game.per_scheduler;
  const CostBreakdown ref{mean_of(rows, &CostBreakdown::power), mean_of(rows, &CostBreakdown::network),
                          mean_of(rows, &CostBreakdown::loss),
                          mean_of(rows, &CostBreakdown::utilization),
                          mean_of(rows, &CostBreakdown::total)};
  auto scale = [&](ExperimentReport &report) {
    report.normalized.clear();
    for (const auto &row : report.per_scheduler) {
      const CostBreakdown &c = row.per_task;
      report.normalized.push_back({c.power / ref.power, c.network / ref.network, c.loss / ref.loss,
                                   c.utilization / ref.utilization, c.total / ref.total});
    }
  };
  scale(point.game);
  scale(point.average);
}

ExperimentPoint run_point(const std::string &scenario, const GridConfig &config,
                          const ExperimentOptions &options) {
  validate(config);
  NashOptions nash;
  nash.threshold = options.threshold;
  nash.max_iter = options.max_iter;
  const EquilibriumResult eq = nash_iterate(config, nash);

  ExperimentPoint point;
  point.game = evaluate(scenario, Scheme::kGame, config, eq.strategy, options);
  point.game.iterations = eq.iterations;
  point.game.converged = eq.converged;

  StrategyMatrix even = StrategyMatrix::Constant(config.num_schedulers(), config.num_nodes(),
                                                 1.0 / static_cast<double>(config.num_nodes()));
  try {
    even = average_allocation(config);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kInfeasible) throw;
  }
  point.average = evaluate(scenario, Scheme::kAverage, config, even, options);
  normalize(point);
  return point;
}

ConvergenceRun run_convergence(const Scenario &scenario, const ExperimentOptions &options) {
  const GridConfig config = scale_to_load(scenario.config, options.load.value_or(kDefaultLoad));
  validate(config);
  NashOptions nash;
  nash.threshold = options.threshold;
  nash.max_iter = options.max_iter;
  ConvergenceRun run;
  run.change_trace = nash_iterate(config, nash).change_trace;
  run.point = run_point(scenario.name, config, options);
  return run;
}

std::vector<double> default_loads() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<ExperimentPoint> run_load_sweep(const Scenario &scenario, std::span<const double> loads,
                                            const ExperimentOptions &options) {
  std::vector<ExperimentPoint> out;
  for (double load : loads) {
    out.push_back(run_point(scenario.name, scale_to_load(scenario.config, load), options));
  }
  return out;
}

std::vector<ExperimentPoint> run_node_sweep(const Scenario &scenario, std::span<const Index> counts,
                                            const ExperimentOptions &options) {
  const double load = options.load.value_or(kDefaultLoad);
  std::vector<ExperimentPoint> out;
  for (Index count : counts) {
    out.push_back(run_point(scenario.name, scale_to_load(take_nodes(scenario.config, count), load),
                            options));
  }
  return out;
}

std::vector<ExperimentPoint> run_scheduler_sweep(const Scenario &scenario,
                                                 std::span<const Index> counts,
                                                 const ExperimentOptions &options) {
  const GridConfig base = scale_to_load(scenario.config, options.load.value_or(kDefaultLoad));
  const double total = base.arrival_rates().sum();
  std::vector<ExperimentPoint> out;
  for (Index count : counts) {
    out.push_back(run_point(scenario.name, equal_schedulers(base, count, total), options));
  }
  return out;
}

ParetoSweep run_pareto_sweep(const Scenario &scenario, std::span<const double> loads,
                             const ExperimentOptions &options) {
  ParetoSweep sweep;
  for (Index j = 0; j < scenario.config.num_nodes(); ++j) {
    const ServiceDistribution &s = scenario.config.nodes[j].service;
    if (s.kind != ServiceKind::kBoundedPareto) {
      throw Error(ErrorCode::kInvalidParameter, "pareto sweep needs bounded pareto nodes");
    }
    sweep.moments.push_back({j, s.pareto, bounded_pareto_moments(s.pareto)});
  }
  sweep.points = run_load_sweep(scenario, loads, options);
  return sweep;
}

FairnessRun run_fairness(const Scenario &scenario, const ExperimentOptions &options) {
  FairnessRun run;
  const auto loads = default_loads();
  run.by_load = run_load_sweep(scenario, loads, options);
  std::vector<Index> counts;
  for (Index m = 2; m <= std::min<Index>(8, scenario.config.num_nodes()); ++m) counts.push_back(m);
  run.by_nodes = run_node_sweep(scenario, counts, options);
  return run;
}

ExperimentPoint run_secondary_costs(const Scenario &scenario, const ExperimentOptions &options) {
  return run_point(scenario.name, scale_to_load(scenario.config, options.load.value_or(kDefaultLoad)),
                   options);
}

}  // namespace gridgame
