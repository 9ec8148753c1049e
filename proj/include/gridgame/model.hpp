#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "gridgame/distributions.hpp"
#include "gridgame/error.hpp"

namespace gridgame {

using Index = Eigen::Index;

/// n x m matrix of slice fractions; row i is scheduler i's split over the nodes.
using StrategyMatrix = Eigen::MatrixXd;

/// Node loads at or above (1 - kStabilityMargin) of capacity count as unstable.
inline constexpr double kStabilityMargin = 1e-9;

/// Tolerance on row sums of a strategy matrix.
inline constexpr double kRowSumTolerance = 1e-9;

enum class ServiceKind { kExponential, kBoundedPareto };

struct ServiceDistribution {
  ServiceKind kind = ServiceKind::kExponential;
  double mu = 0.0;                 // exponential only
  BoundedParetoParams pareto{};    // bounded pareto only
  double mean = 0.0;
  double second_moment = 0.0;

  static ServiceDistribution exponential(double mu);
  static ServiceDistribution bounded_pareto(const BoundedParetoParams &params);
};

struct NodeSpec {
  Index id = 0;
  double mu = 0.0;
  ServiceDistribution service;
  double p_busy = 1.0;
  double p_idle_wait = 1.0;
  double c_r = 1.0;
  double mttf = 1.0;
  double c_f = 1.0;
  double rho_util = 1.0;
  double compute_capacity = 1.0;
  double disk_capacity = 1.0;
};

struct SchedulerSpec {
  Index id = 0;
  double lambda = 0.0;
  double bits = 1.0;
  double compute_demand = 1.0;
};

struct LinkSpec {
  Index scheduler = 0;
  Index node = 0;
  double delay = 0.0;
  double bandwidth = 1.0;
};

struct CostConstants {
  double c_p = 1.0;
  double c_bw = 1.0;
  double c_n = 1.0;
};

/// Full scenario. `links` is stored dense, row-major by scheduler: links[i * m + j].
struct GridConfig {
  std::vector<NodeSpec> nodes;
  std::vector<SchedulerSpec> schedulers;
  std::vector<LinkSpec> links;
  CostConstants constants;

  Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  Index num_schedulers() const { return static_cast<Index>(schedulers.size()); }

  const LinkSpec &link(Index i, Index j) const {
    return links[static_cast<std::size_t>(i * num_nodes() + j)];
  }

  /// lambda_i as a vector.
  Eigen::VectorXd arrival_rates() const;
  /// u_j as a vector.
  Eigen::VectorXd service_rates() const;

  /// Fills `links` with the default link (delay 0, bandwidth 1) for every pair.
  void set_default_links();
};

struct Violation {
  ErrorCode code;
  std::string message;
};

/// Every violated constraint, empty when the config is usable.
std::vector<Violation> check(const GridConfig &config);

class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation> &violations() const noexcept { return violations_; }

private:
  std::vector<Violation> violations_;
};

/// Returns the config unchanged if it passes `check`, otherwise throws ValidationError.
const GridConfig &validate(const GridConfig &config);

/// Offered load sum(lambda) / sum(mu).
double system_load(const GridConfig &config);

/// Scales every lambda by one common factor so that system_load hits `target`.
GridConfig scale_to_load(GridConfig config, double target);

/// Checks row sums, nonnegativity and per-node stability; empty when feasible.
std::vector<Violation> check_strategy(const StrategyMatrix &strategy, const GridConfig &config);

}  // namespace gridgame
