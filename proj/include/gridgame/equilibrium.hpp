#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "gridgame/model.hpp"

namespace gridgame {

/// Scheduler i's cost-minimising row given everyone else's fixed rows.
struct BestResponse {
  Eigen::VectorXd row;          // a_ij over all nodes
  double alpha = 0.0;           // multiplier of the row-sum constraint
  Index active_count = 0;       // d_i, number of nodes with a positive share
  std::vector<Index> ordering;  // nodes by ascending potential power cost; unusable nodes last
  Eigen::VectorXd capacities;   // u_ji the response was computed against
};

enum class UpdateSchedule {
  kGaussSeidel,  // schedulers respond in index order to the latest rows
  kJacobi,       // every scheduler responds to the previous round's matrix
};

struct NashOptions {
  double threshold = 1e-4;
  int max_iter = 1000;
  UpdateSchedule schedule = UpdateSchedule::kGaussSeidel;
  std::optional<StrategyMatrix> initial;  // zero matrix when absent
};

struct EquilibriumResult {
  StrategyMatrix strategy;
  int iterations = 0;
  bool converged = false;
  std::vector<double> change_trace;
  Eigen::VectorXd per_scheduler_cost;  // per-task power cost at the final strategy
  Eigen::VectorXd alphas;              // multiplier of each scheduler's last response
  Eigen::MatrixXd capacities;          // row i: u_ji faced by scheduler i's last response
  std::vector<StrategyMatrix> sweeps;  // strategy after every round, when recorded
};

/// u_ji = u_j - sum_{k != i} a_kj lambda_k. May be <= 0.
double available_capacity(Index j, Index i, const StrategyMatrix &strategy, const GridConfig &config);
Eigen::VectorXd available_capacities(Index i, const StrategyMatrix &strategy, const GridConfig &config);

/// Marginal cost level at which node j starts receiving load from a scheduler that
/// sees capacity u_ji. Throws kNonPositiveCapacity when u_ji <= 0.
double potential_power_cost(Index j, double capacity, const GridConfig &config);

/// Derivative of the per-task power cost with respect to a_ij at the given slice.
double marginal_power_cost(Index j, double capacity, double slice, double lambda,
                           const GridConfig &config);

/// Share a_ij implied by multiplier alpha, unclipped (negative when alpha < t_j).
double share_at(Index j, double capacity, double lambda, double alpha, const GridConfig &config);

/// Multiplier for which the shares of `active` sum to one. Bisection on the
/// strictly increasing total share. Throws kNoRoot if the active capacities
/// cannot carry lambda_i.
double solve_alpha(const std::vector<Index> &active, Index i, const Eigen::VectorXd &capacities,
                   const GridConfig &config);

/// Closed-form best response: sort by potential cost, take the largest feasible
/// prefix, solve for alpha on it.
BestResponse best_response(Index i, const StrategyMatrix &strategy, const GridConfig &config);

/// Same optimum reached by solving on all usable nodes and repeatedly dropping
/// nodes with negative share. Kept as an independent route for cross-checks.
BestResponse best_response_by_elimination(Index i, const StrategyMatrix &strategy,
                                          const GridConfig &config);

/// Relative L1 change sum|next - prev| / max(sum|prev|, n).
double convergence_metric(const StrategyMatrix &prev, const StrategyMatrix &next);

/// Best-response dynamics from `options.initial` (or zero). Never throws on
/// non-convergence; check `converged`.
EquilibriumResult nash_iterate(const GridConfig &config, const NashOptions &options = {},
                               bool record_sweeps = false);

/// Equal split a_ij = 1/m. Throws kInfeasible if some node cannot absorb it.
StrategyMatrix average_allocation(const GridConfig &config);

struct KktReport {
  double max_active_error = 0.0;    // max |marginal - alpha| / |alpha| over active nodes
  double min_inactive_slack = 0.0;  // min (t_j - alpha) over inactive nodes, +inf if none
};

/// KKT residuals of row i against the capacities it faces in `strategy`.
KktReport kkt_certificate(Index i, const StrategyMatrix &strategy, double alpha,
                          const GridConfig &config);

/// Same, against explicitly supplied capacities.
KktReport kkt_certificate(const Eigen::VectorXd &row, const Eigen::VectorXd &capacities,
                          double lambda, double alpha, const GridConfig &config);

}  // namespace gridgame
