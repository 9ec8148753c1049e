#pragma once

#include <Eigen/Dense>

#include <sstream>

#include "gridgame/error.hpp"
#include "gridgame/model.hpp"

// Cost components of a task slice. The strategy-dependent functions accept any
// Eigen matrix expression, so callers can pass blocks, perturbed copies or
// matrices with a different scalar type without materialising a StrategyMatrix.

namespace gridgame {

struct CostBreakdown {
  double power = 0.0;
  double network = 0.0;
  double loss = 0.0;
  double utilization = 0.0;
  double total = 0.0;

  CostBreakdown &operator+=(const CostBreakdown &other) {
    power += other.power;
    network += other.network;
    loss += other.loss;
    utilization += other.utilization;
    total = power + network + loss + utilization;
    return *this;
  }

  CostBreakdown scaled(double factor) const {
    return {power * factor, network * factor, loss * factor, utilization * factor,
            (power + network + loss + utilization) * factor};
  }
};

/// Total arrival rate routed to node j: sum_k a_kj lambda_k.
template <typename Derived>
typename Derived::Scalar node_load(Index j, const Eigen::MatrixBase<Derived> &strategy,
                                   const GridConfig &config) {
  using Scalar = typename Derived::Scalar;
  Scalar load(0);
  for (Index k = 0; k < strategy.rows(); ++k) load += strategy(k, j) * config.schedulers[k].lambda;
  return load;
}

/// Throws kUnstableNode when node j's utilisation reaches 1 - kStabilityMargin.
template <typename Scalar>
void require_stable(Index j, const Scalar &load, const GridConfig &config) {
  const double mean = config.nodes[j].service.mean;
  if (!(load * mean < 1.0 - kStabilityMargin)) {
    std::ostringstream os;
    os << "node " << j << " utilisation " << load * mean << " is not below 1";
    throw Error(ErrorCode::kUnstableNode, os.str());
  }
}

template <typename Scalar>
Scalar transmission_time(Index i, Index j, const Scalar &slice, const GridConfig &config) {
  const LinkSpec &link = config.link(i, j);
  return (link.delay + config.schedulers[i].bits / link.bandwidth) * slice;
}

template <typename Scalar>
Scalar network_cost(Index i, Index j, const Scalar &slice, const GridConfig &config) {
  const LinkSpec &link = config.link(i, j);
  const CostConstants &c = config.constants;
  return (c.c_bw * link.bandwidth + c.c_n) * transmission_time(i, j, slice, config);
}

/// F_ij1: expected service work per unit time contributed by the slice.
template <typename Scalar>
Scalar service_occupancy(Index i, Index j, const Scalar &slice, const GridConfig &config) {
  return config.nodes[j].service.mean * slice * config.schedulers[i].lambda;
}

/// F_ij2: the slice's share of the M/G/1 waiting term at node j.
template <typename Derived>
typename Derived::Scalar waiting_occupancy(Index i, Index j,
                                           const Eigen::MatrixBase<Derived> &strategy,
                                           const GridConfig &config) {
  const auto load = node_load(j, strategy, config);
  require_stable(j, load, config);
  const ServiceDistribution &s = config.nodes[j].service;
  return strategy(i, j) * config.schedulers[i].lambda * s.second_moment * load /
         (2.0 * (1.0 - s.mean * load));
}

template <typename Derived>
typename Derived::Scalar power_cost(Index i, Index j, const Eigen::MatrixBase<Derived> &strategy,
                                    const GridConfig &config) {
  const NodeSpec &node = config.nodes[j];
  const double c_p = config.constants.c_p;
  return c_p * node.p_busy * service_occupancy(i, j, strategy(i, j), config) +
         c_p * node.p_idle_wait * waiting_occupancy(i, j, strategy, config);
}

template <typename Derived>
typename Derived::Scalar loss_cost(Index i, Index j, const Eigen::MatrixBase<Derived> &strategy,
                                   const GridConfig &config) {
  const NodeSpec &node = config.nodes[j];
  return node.c_r / node.mttf *
         (service_occupancy(i, j, strategy(i, j), config) + waiting_occupancy(i, j, strategy, config));
}

/// Both terms carry an extra a_ij because the resource fraction f_r is itself
/// proportional to the slice, which makes this component quadratic in a_ij.
template <typename Derived>
typename Derived::Scalar utilization_cost(Index i, Index j,
                                          const Eigen::MatrixBase<Derived> &strategy,
                                          const GridConfig &config) {
  const NodeSpec &node = config.nodes[j];
  const SchedulerSpec &sched = config.schedulers[i];
  const auto slice = strategy(i, j);
  const auto serve = service_occupancy(i, j, slice, config);
  const auto wait = waiting_occupancy(i, j, strategy, config);
  const double amortized = node.c_f * node.rho_util;
  return amortized * (sched.compute_demand / node.compute_capacity) * slice * serve +
         amortized * (sched.bits / node.disk_capacity) * slice * (serve + wait);
}

/// Componentwise sums over all nodes for scheduler i.
template <typename Derived>
CostBreakdown scheduler_cost(Index i, const Eigen::MatrixBase<Derived> &strategy,
                             const GridConfig &config) {
  CostBreakdown out;
  for (Index j = 0; j < config.num_nodes(); ++j) {
    out.power += power_cost(i, j, strategy, config);
    out.network += network_cost(i, j, strategy(i, j), config);
    out.loss += loss_cost(i, j, strategy, config);
    out.utilization += utilization_cost(i, j, strategy, config);
  }
  out.total = out.power + out.network + out.loss + out.utilization;
  return out;
}

/// Power cost per task of scheduler i: the power component with lambda_i divided out.
template <typename Derived>
typename Derived::Scalar per_task_power_cost(Index i, const Eigen::MatrixBase<Derived> &strategy,
                                             const GridConfig &config) {
  using Scalar = typename Derived::Scalar;
  const double c_p = config.constants.c_p;
  Scalar cost(0);
  for (Index j = 0; j < config.num_nodes(); ++j) {
    const NodeSpec &node = config.nodes[j];
    const ServiceDistribution &s = node.service;
    const auto load = node_load(j, strategy, config);
    require_stable(j, load, config);
    const auto slice = strategy(i, j);
    cost += c_p * node.p_busy * s.mean * slice +
            c_p * node.p_idle_wait * slice * s.second_moment * load / (2.0 * (1.0 - s.mean * load));
  }
  return cost;
}

}  // namespace gridgame
