#pragma once

#include <cstdint>
#include <vector>

#include "gridgame/model.hpp"

namespace gridgame {

struct ArrivalStream {
  double rate = 0.0;  // lambda_i * a_ij
  Index scheduler = 0;
};

struct DesConfig {
  NodeSpec node;
  std::vector<ArrivalStream> arrival_streams;
  std::int64_t horizon = 1'000'000;  // tasks simulated in total
  std::int64_t warmup = -1;          // discarded tasks; negative means 10% of horizon
  std::uint64_t seed = 1;
  int batches = 32;
};

struct DesStats {
  double mean_wait = 0.0;
  double mean_service = 0.0;
  double mean_sojourn = 0.0;
  double utilization = 0.0;
  double ci95_wait = 0.0;      // batch-means half-width
  double ci95_sojourn = 0.0;
  double mean_in_system = 0.0; // time average over the measurement window
  double throughput = 0.0;     // measured tasks per unit time
  std::int64_t measured = 0;
};

/// Pollaczek-Khinchine mean wait rate * E[S^2] / (2 (1 - rate * E[S])).
/// Throws kUnstableNode at utilisation >= 1 - kStabilityMargin.
double pk_mean_wait(double total_rate, const ServiceDistribution &service);

/// FIFO single-server simulation of merged Poisson streams.
DesStats simulate_node(const DesConfig &cfg);

}  // namespace gridgame
