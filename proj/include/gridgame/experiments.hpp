#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridgame/costs.hpp"
#include "gridgame/distributions.hpp"
#include "gridgame/equilibrium.hpp"
#include "gridgame/model.hpp"
#include "gridgame/scenario_io.hpp"

namespace gridgame {

enum class Scheme { kGame, kAverage };

std::string_view to_string(Scheme scheme);

struct SchedulerCosts {
  Index scheduler = 0;
  CostBreakdown rate;      // scheduler_cost as evaluated
  CostBreakdown per_task;  // lambda-proportional components divided by lambda_i
};

struct ExperimentReport {
  std::string scenario;
  Scheme scheme = Scheme::kGame;
  bool feasible = true;  // false when the scheme cannot keep every node stable
  std::vector<SchedulerCosts> per_scheduler;
  std::vector<CostBreakdown> normalized;  // per_task / game-scheme mean, componentwise
  double fairness = 1.0;
  int iterations = 0;
  bool converged = true;
  double load = 0.0;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  StrategyMatrix strategy;

  double mean_per_task_power() const;
};

/// Game and average-allocation results for one configuration.
struct ExperimentPoint {
  ExperimentReport game;
  ExperimentReport average;
};

struct ExperimentOptions {
  double threshold = 1e-4;
  int max_iter = 1000;
  std::uint64_t seed = 0;
  std::optional<double> load;  // overrides each experiment's default load
};

/// Jain-style fairness (sum T)^2 / (n sum T^2), computed as mean^2 / (mean^2 + var).
double fairness_index(std::span<const double> costs);

/// Per-task view of a scheduler's cost breakdown.
CostBreakdown per_task_costs(const CostBreakdown &rate, double lambda);

/// Divides both reports' per-task costs by the game scheme's mean per scheduler.
void normalize(ExperimentPoint &point);

/// Solves both schemes for `config` as given.
ExperimentPoint run_point(const std::string &scenario, const GridConfig &config,
                          const ExperimentOptions &options);

struct ConvergenceRun {
  ExperimentPoint point;
  std::vector<double> change_trace;
};

/// Best-response dynamics at the default load 0.2; the trace is kept.
ConvergenceRun run_convergence(const Scenario &scenario, const ExperimentOptions &options);

std::vector<double> default_loads();

std::vector<ExperimentPoint> run_load_sweep(const Scenario &scenario, std::span<const double> loads,
                                            const ExperimentOptions &options);

/// Node prefixes of the scenario's node list, each rescaled to the fixed load.
std::vector<ExperimentPoint> run_node_sweep(const Scenario &scenario, std::span<const Index> counts,
                                            const ExperimentOptions &options);

/// `count` identical schedulers sharing the scenario's total arrival rate at the fixed load.
std::vector<ExperimentPoint> run_scheduler_sweep(const Scenario &scenario,
                                                 std::span<const Index> counts,
                                                 const ExperimentOptions &options);

struct NodeMoments {
  Index node = 0;
  BoundedParetoParams params;
  Moments moments;
};

struct ParetoSweep {
  std::vector<NodeMoments> moments;
  std::vector<ExperimentPoint> points;
};

ParetoSweep run_pareto_sweep(const Scenario &scenario, std::span<const double> loads,
                             const ExperimentOptions &options);

struct FairnessRun {
  std::vector<ExperimentPoint> by_load;
  std::vector<ExperimentPoint> by_nodes;
};

/// Load sweep plus node sweep over counts 2..8 at the fixed load.
FairnessRun run_fairness(const Scenario &scenario, const ExperimentOptions &options);

/// Network, loss and utilisation costs of both schemes at the power-optimal equilibrium.
ExperimentPoint run_secondary_costs(const Scenario &scenario, const ExperimentOptions &options);

}  // namespace gridgame
