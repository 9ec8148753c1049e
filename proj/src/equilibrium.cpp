#include "gridgame/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "gridgame/costs.hpp"
#include "gridgame/error.hpp"

namespace gridgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-node constants of the per-task power cost:
//   busy  = c_p p_j1 h_j           (service term, linear in a_ij)
//   wait  = c_p p_j2 h2_j          (waiting term coefficient)
//   floor = busy - wait / (2 h_j)  (asymptote of the marginal as the node empties)
struct NodeTerms {
  double mean;
  double busy;
  double wait;
  double floor;

  NodeTerms(Index j, const GridConfig &config) {
    const NodeSpec &node = config.nodes[j];
    const double c_p = config.constants.c_p;
    mean = node.service.mean;
    busy = c_p * node.p_busy * mean;
    wait = c_p * node.p_idle_wait * node.service.second_moment;
    floor = busy - wait / (2.0 * mean);
  }

  bool flat() const { return wait == 0.0; }

  double threshold(double capacity) const {
    return busy - wait / (2.0 * mean) + wait / (2.0 * mean * mean * capacity);
  }

  // Residual capacity u_ji - a_ij lambda_i left on the node at multiplier alpha.
  double residual(double capacity, double alpha) const {
    const double gap = alpha - floor;
    if (!(gap > 0.0)) return kInf;
    return std::sqrt(wait * capacity / (mean * (wait + 2.0 * mean * (alpha - busy))));
  }
};

std::vector<Index> order_by_threshold(const Eigen::VectorXd &capacities, const GridConfig &config,
                                      std::vector<double> &thresholds) {
  const Index m = config.num_nodes();
  thresholds.assign(static_cast<std::size_t>(m), kInf);
  std::vector<Index> usable;
  std::vector<Index> unusable;
  for (Index j = 0; j < m; ++j) {
    if (capacities(j) > 0.0) {
      thresholds[j] = NodeTerms(j, config).threshold(capacities(j));
      usable.push_back(j);
    } else {
      unusable.push_back(j);
    }
  }
  std::stable_sort(usable.begin(), usable.end(),
                   [&](Index a, Index b) { return thresholds[a] < thresholds[b]; });
  usable.insert(usable.end(), unusable.begin(), unusable.end());
  return usable;
}

Index usable_count(const std::vector<Index> &ordering, const Eigen::VectorXd &capacities) {
  return static_cast<Index>(std::count_if(ordering.begin(), ordering.end(),
                                          [&](Index j) { return capacities(j) > 0.0; }));
}

void require_capacity(Index i, const Eigen::VectorXd &capacities, double lambda) {
  const double usable = capacities.cwiseMax(0.0).sum();
  if (!(usable > lambda)) {
    std::ostringstream os;
    os << "scheduler " << i << ": available capacity " << usable << " cannot carry lambda " << lambda;
    throw Error(ErrorCode::kInfeasible, os.str());
  }
}

void normalize_row(Eigen::VectorXd &row) {
  row = row.cwiseMax(0.0);
  row /= row.sum();
}

// Bisection for a root of an increasing function on (lo, hi) with f(lo) <= 0 <= f(hi).
template <typename F>
double bisect(F &&f, double lo, double hi) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double f_mid = f(mid);
    if (f_mid <= 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

// Grows hi above `start` until f(hi) >= 0.
template <typename F>
double bracket_above(F &&f, double start, double step) {
  double hi = start + step;
  for (int iter = 0; iter < 2000 && f(hi) < 0.0; ++iter) {
    step *= 2.0;
    hi = start + step;
  }
  return hi;
}

// Water-filling when some usable node has no waiting term. Those nodes have a flat
// marginal, so they take their whole (stability-limited) capacity as soon as alpha
// passes their threshold, and the remaining demand lands on the smooth nodes.
BestResponse waterfill_with_flat_nodes(Index i, const Eigen::VectorXd &capacities,
                                       std::vector<Index> ordering,
                                       const std::vector<double> &thresholds,
                                       const GridConfig &config) {
  const double lambda = config.schedulers[i].lambda;
  const Index m = config.num_nodes();
  std::vector<Index> flat;
  std::vector<Index> smooth;
  for (Index j : ordering) {
    if (!(capacities(j) > 0.0)) continue;
    (NodeTerms(j, config).flat() ? flat : smooth).push_back(j);
  }

  auto flat_cap = [&](Index j) {
    return std::max(0.0, capacities(j) - 2.0 * kStabilityMargin * config.nodes[j].mu);
  };
  auto smooth_load = [&](double alpha) {
    double total = 0.0;
    for (Index j : smooth) {
      if (alpha > thresholds[j]) {
        total += std::max(0.0, capacities(j) - NodeTerms(j, config).residual(capacities(j), alpha));
      }
    }
    return total;
  };

  Eigen::VectorXd load = Eigen::VectorXd::Zero(m);
  double alpha = 0.0;
  double filled = 0.0;
  double lo = smooth.empty() ? 0.0 : thresholds[smooth.front()];
  bool done = false;
  for (Index j : flat) {
    const double tau = thresholds[j];
    if (smooth_load(tau) + filled >= lambda) {
      const double target = lambda - filled;
      alpha = bisect([&](double a) { return smooth_load(a) - target; }, std::min(lo, tau), tau);
      done = true;
      break;
    }
    if (smooth_load(tau) + filled + flat_cap(j) >= lambda) {
      alpha = tau;
      load(j) = lambda - filled - smooth_load(tau);
      filled = lambda - smooth_load(tau);
      done = true;
      break;
    }
    load(j) = flat_cap(j);
    filled += flat_cap(j);
    lo = std::max(lo, tau);
  }
  if (!done) {
    const double target = lambda - filled;
    double smooth_cap = 0.0;
    for (Index j : smooth) smooth_cap += capacities(j);
    if (!(smooth_cap > target)) {
      throw Error(ErrorCode::kInfeasible, "flat nodes at capacity cannot absorb the remaining load");
    }
    auto excess = [&](double a) { return smooth_load(a) - target; };
    const double start = std::max(lo, thresholds[smooth.front()]);
    alpha = bisect(excess, start, bracket_above(excess, start, std::max(std::abs(start), 1e-12)));
  }
  for (Index j : smooth) {
    if (alpha > thresholds[j]) {
      load(j) = std::max(0.0, capacities(j) - NodeTerms(j, config).residual(capacities(j), alpha));
    }
  }

  BestResponse out;
  out.row = load / lambda;
  normalize_row(out.row);
  out.alpha = alpha;
  out.active_count = (out.row.array() > 0.0).count();
  out.ordering = std::move(ordering);
  out.capacities = capacities;
  return out;
}

BestResponse finish(Index i, const std::vector<Index> &active, double alpha,
                    const Eigen::VectorXd &capacities, std::vector<Index> ordering,
                    const GridConfig &config) {
  const double lambda = config.schedulers[i].lambda;
  BestResponse out;
  out.row = Eigen::VectorXd::Zero(config.num_nodes());
  for (Index j : active) out.row(j) = share_at(j, capacities(j), lambda, alpha, config);
  normalize_row(out.row);
  out.alpha = alpha;
  out.active_count = static_cast<Index>(active.size());
  out.ordering = std::move(ordering);
  out.capacities = capacities;
  return out;
}

}  // namespace

double available_capacity(Index j, Index i, const StrategyMatrix &strategy, const GridConfig &config) {
  double others = 0.0;
  for (Index k = 0; k < config.num_schedulers(); ++k) {
    if (k != i) others += strategy(k, j) * config.schedulers[k].lambda;
  }
  return config.nodes[j].mu - others;
}

Eigen::VectorXd available_capacities(Index i, const StrategyMatrix &strategy, const GridConfig &config) {
  Eigen::VectorXd caps(config.num_nodes());
  for (Index j = 0; j < config.num_nodes(); ++j) caps(j) = available_capacity(j, i, strategy, config);
  return caps;
}

double potential_power_cost(Index j, double capacity, const GridConfig &config) {
  if (!(capacity > 0.0)) {
    std::ostringstream os;
    os << "node " << j << " has no capacity left (" << capacity << ")";
    throw Error(ErrorCode::kNonPositiveCapacity, os.str());
  }
  return NodeTerms(j, config).threshold(capacity);
}

double marginal_power_cost(Index j, double capacity, double slice, double lambda,
                           const GridConfig &config) {
  const NodeTerms t(j, config);
  const double left = capacity - slice * lambda;
  return t.busy + t.wait * capacity / (2.0 * t.mean * t.mean * left * left) - t.wait / (2.0 * t.mean);
}

double share_at(Index j, double capacity, double lambda, double alpha, const GridConfig &config) {
  return (capacity - NodeTerms(j, config).residual(capacity, alpha)) / lambda;
}

double solve_alpha(const std::vector<Index> &active, Index i, const Eigen::VectorXd &capacities,
                   const GridConfig &config) {
  const double lambda = config.schedulers[i].lambda;
  if (active.empty()) throw Error(ErrorCode::kNoRoot, "empty active set");
  double total = 0.0;
  double floor = -kInf;
  double t_max = -kInf;
  for (Index j : active) {
    const NodeTerms t(j, config);
    if (!(capacities(j) > 0.0)) throw Error(ErrorCode::kNoRoot, "active node without capacity");
    if (t.flat()) throw Error(ErrorCode::kInvalidParameter, "active node without waiting cost");
    total += capacities(j);
    floor = std::max(floor, t.floor);
    t_max = std::max(t_max, t.threshold(capacities(j)));
  }
  if (!(total > lambda)) {
    std::ostringstream os;
    os << "active capacity " << total << " cannot carry lambda " << lambda;
    throw Error(ErrorCode::kNoRoot, os.str());
  }

  // sum_j (u_ji - r_j(alpha)) - lambda: strictly increasing, -inf at the floor,
  // total - lambda > 0 as alpha grows.
  auto excess = [&](double alpha) {
    double placed = 0.0;
    for (Index j : active) placed += capacities(j) - NodeTerms(j, config).residual(capacities(j), alpha);
    return placed - lambda;
  };

  if (excess(t_max) > 0.0) return bisect(excess, floor, t_max);
  return bisect(excess, t_max, bracket_above(excess, t_max, std::max(t_max - floor, 1e-300)));
}

BestResponse best_response(Index i, const StrategyMatrix &strategy, const GridConfig &config) {
  const double lambda = config.schedulers[i].lambda;
  const Eigen::VectorXd caps = available_capacities(i, strategy, config);
  require_capacity(i, caps, lambda);

  std::vector<double> thresholds;
  std::vector<Index> ordering = order_by_threshold(caps, config, thresholds);
  const Index usable = usable_count(ordering, caps);

  for (Index idx = 0; idx < usable; ++idx) {
    if (NodeTerms(ordering[idx], config).flat()) {
      return waterfill_with_flat_nodes(i, caps, std::move(ordering), thresholds, config);
    }
  }

  // Largest prefix d with sum_{j<=d} u_ji - lambda <= sum_{j<=d} r_j(t_d), i.e. the
  // first d-1 nodes cannot absorb lambda before the marginal reaches node d's threshold.
  Index active_count = 1;
  for (Index d = 1; d <= usable; ++d) {
    const double t_d = thresholds[ordering[d - 1]];
    double spare = -lambda;
    double residual = 0.0;
    for (Index idx = 0; idx < d; ++idx) {
      const Index j = ordering[idx];
      spare += caps(j);
      residual += NodeTerms(j, config).residual(caps(j), t_d);
    }
    if (spare <= residual) active_count = d;
  }

  std::vector<Index> active(ordering.begin(), ordering.begin() + active_count);
  // The capacity precondition of solve_alpha can fail only for the full usable set;
  // a strict prefix with d < usable always has a root above t_d.
  const double alpha = solve_alpha(active, i, caps, config);
  return finish(i, active, alpha, caps, std::move(ordering), config);
}

BestResponse best_response_by_elimination(Index i, const StrategyMatrix &strategy,
                                          const GridConfig &config) {
  const double lambda = config.schedulers[i].lambda;
  const Eigen::VectorXd caps = available_capacities(i, strategy, config);
  require_capacity(i, caps, lambda);

  std::vector<double> thresholds;
  std::vector<Index> ordering = order_by_threshold(caps, config, thresholds);
  std::vector<Index> active;
  for (Index j = 0; j < config.num_nodes(); ++j) {
    if (caps(j) > 0.0) active.push_back(j);
  }
  while (true) {
    const double alpha = solve_alpha(active, i, caps, config);
    std::vector<Index> kept;
    for (Index j : active) {
      if (share_at(j, caps(j), lambda, alpha, config) >= 0.0) kept.push_back(j);
    }
    if (kept.size() == active.size()) {
      return finish(i, active, alpha, caps, std::move(ordering), config);
    }
    active = std::move(kept);
  }
}

double convergence_metric(const StrategyMatrix &prev, const StrategyMatrix &next) {
  if (prev.rows() != next.rows() || prev.cols() != next.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "strategy matrices differ in shape");
  }
  const double base = std::max(prev.cwiseAbs().sum(), static_cast<double>(prev.rows()));
  return (next - prev).cwiseAbs().sum() / base;
}

EquilibriumResult nash_iterate(const GridConfig &config, const NashOptions &options,
                               bool record_sweeps) {
  const Index n = config.num_schedulers();
  const Index m = config.num_nodes();
  EquilibriumResult result;
  result.strategy = options.initial.value_or(StrategyMatrix::Zero(n, m));
  if (result.strategy.rows() != n || result.strategy.cols() != m) {
    throw Error(ErrorCode::kShapeMismatch, "initial strategy has the wrong shape");
  }
  result.alphas = Eigen::VectorXd::Zero(n);
  result.capacities = Eigen::MatrixXd::Zero(n, m);

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    const StrategyMatrix prev = result.strategy;
    StrategyMatrix next = result.strategy;
    for (Index i = 0; i < n; ++i) {
      const StrategyMatrix &facing = options.schedule == UpdateSchedule::kJacobi ? prev : next;
      const BestResponse br = best_response(i, facing, config);
      next.row(i) = br.row.transpose();
      result.alphas(i) = br.alpha;
      result.capacities.row(i) = br.capacities.transpose();
    }
    if (options.schedule == UpdateSchedule::kJacobi) {
      const auto violations = check_strategy(next, config);
      if (!violations.empty()) {
        throw Error(ErrorCode::kInfeasible, "simultaneous update left the feasible region: " +
                                                violations.front().message);
      }
    }
    result.strategy = std::move(next);
    result.iterations = iter;
    if (record_sweeps) result.sweeps.push_back(result.strategy);
    const double change = convergence_metric(prev, result.strategy);
    result.change_trace.push_back(change);
    if (change < options.threshold) {
      result.converged = true;
      break;
    }
  }

  result.per_scheduler_cost = Eigen::VectorXd::Zero(n);
  if (check_strategy(result.strategy, config).empty()) {
    for (Index i = 0; i < n; ++i) {
      result.per_scheduler_cost(i) = per_task_power_cost(i, result.strategy, config);
    }
  }
  return result;
}

StrategyMatrix average_allocation(const GridConfig &config) {
  const Index n = config.num_schedulers();
  const Index m = config.num_nodes();
  const double share = config.arrival_rates().sum() / static_cast<double>(m);
  for (Index j = 0; j < m; ++j) {
    if (!(share * config.nodes[j].service.mean < 1.0 - kStabilityMargin)) {
      std::ostringstream os;
      os << "node " << j << " (mu=" << config.nodes[j].mu << ") cannot absorb an equal share "
         << share;
      throw Error(ErrorCode::kInfeasible, os.str());
    }
  }
  return StrategyMatrix::Constant(n, m, 1.0 / static_cast<double>(m));
}

KktReport kkt_certificate(const Eigen::VectorXd &row, const Eigen::VectorXd &capacities,
                          double lambda, double alpha, const GridConfig &config) {
  KktReport report;
  report.min_inactive_slack = kInf;
  for (Index j = 0; j < row.size(); ++j) {
    if (!(capacities(j) > 0.0)) continue;
    const NodeTerms t(j, config);
    if (row(j) > 0.0) {
      // A flat node filled to its stability cap is bound by capacity, not alpha.
      if (t.flat() && row(j) * lambda >= capacities(j) - 3.0 * kStabilityMargin * config.nodes[j].mu) {
        continue;
      }
      const double marginal = marginal_power_cost(j, capacities(j), row(j), lambda, config);
      report.max_active_error =
          std::max(report.max_active_error, std::abs(marginal - alpha) / std::abs(alpha));
    } else {
      report.min_inactive_slack = std::min(report.min_inactive_slack, t.threshold(capacities(j)) - alpha);
    }
  }
  return report;
}

KktReport kkt_certificate(Index i, const StrategyMatrix &strategy, double alpha,
                          const GridConfig &config) {
  return kkt_certificate(strategy.row(i).transpose(), available_capacities(i, strategy, config),
                         config.schedulers[i].lambda, alpha, config);
}

}  // namespace gridgame
