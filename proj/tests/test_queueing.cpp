#include <doctest.h>

#include <cmath>
#include <random>

#include "gridgame/costs.hpp"
#include "gridgame/queueing.hpp"
#include "oracles.hpp"

using namespace gridgame;

namespace {

NodeSpec exp_node(double mu) {
  NodeSpec n;
  n.mu = mu;
  n.service = ServiceDistribution::exponential(mu);
  return n;
}

NodeSpec pareto_node(double k, double p, double shape) {
  NodeSpec n;
  n.service = ServiceDistribution::bounded_pareto({k, p, shape});
  n.mu = 1.0 / n.service.mean;
  return n;
}

DesConfig des(const NodeSpec &node, double rate, std::int64_t horizon, std::uint64_t seed) {
  DesConfig cfg;
  cfg.node = node;
  cfg.arrival_streams = {{rate, 0}};
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("pk mean wait") {
  const auto mm1 = ServiceDistribution::exponential(1.0);
  CHECK(pk_mean_wait(0.0, mm1) == 0.0);
  CHECK(pk_mean_wait(0.5, mm1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pk_mean_wait(1.0, mm1), Error);
  try {
    pk_mean_wait(2.0, mm1);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUnstableNode);
  }
}

TEST_CASE("M/M/1 simulation") {
  const DesStats s = simulate_node(des(exp_node(1.0), 0.5, 200'000, 9));
  CHECK(std::abs(s.mean_wait - 1.0) <= std::max(0.05, s.ci95_wait));
  CHECK(s.mean_service == doctest::Approx(1.0).epsilon(0.02));
  CHECK(s.utilization == doctest::Approx(0.5).epsilon(0.02));
  CHECK(s.utilization < 1.0);
  CHECK(std::abs(s.mean_sojourn - (s.mean_wait + s.mean_service)) <= 1e-9 * s.mean_sojourn);
  CHECK(s.measured == 180'000);
  CHECK(s.ci95_wait > 0.0);
  // Little's law.
  CHECK(std::abs(s.mean_in_system - 0.5 * s.mean_sojourn) <= std::max(0.02 * s.mean_in_system, 0.5 * s.ci95_sojourn));
  CHECK(s.throughput == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("merged streams behave like one") {
  DesConfig cfg = des(exp_node(4.0), 0.0, 100'000, 3);
  cfg.arrival_streams = {{0.8, 0}, {1.2, 1}};
  const DesStats s = simulate_node(cfg);
  const double expected = pk_mean_wait(2.0, cfg.node.service);
  CHECK(std::abs(s.mean_wait - expected) <= std::max(0.05 * expected, s.ci95_wait));
}

TEST_CASE("light traffic and zero rate") {
  const DesStats zero = simulate_node(des(exp_node(1.0), 0.0, 1000, 1));
  CHECK(zero.mean_wait == 0.0);
  CHECK(zero.measured == 0);
  const DesStats light = simulate_node(des(exp_node(1.0), 1e-4, 20'000, 1));
  CHECK(light.mean_wait < 1e-2);
}

TEST_CASE("simulation is deterministic in its seed") {
  const NodeSpec node = pareto_node(0.001, 0.07, 1.1);
  const double rate = 0.5 * node.mu;
  const DesStats a = simulate_node(des(node, rate, 50'000, 123));
  const DesStats b = simulate_node(des(node, rate, 50'000, 123));
  const DesStats c = simulate_node(des(node, rate, 50'000, 124));
  CHECK(a.mean_wait == b.mean_wait);
  CHECK(a.ci95_wait == b.ci95_wait);
  CHECK(a.mean_in_system == b.mean_in_system);
  CHECK(a.utilization == b.utilization);
  CHECK(a.mean_wait != c.mean_wait);
}

TEST_CASE("bounded pareto node at half load") {
  const NodeSpec node = pareto_node(0.001, 0.07, 1.1);
  const double rate = 0.5 * node.mu;
  const DesStats s = simulate_node(des(node, rate, 400'000, 2));
  const double expected = pk_mean_wait(rate, node.service);
  CHECK(std::abs(s.mean_wait - expected) <= std::max(0.05 * expected, s.ci95_wait));
  CHECK(std::abs(s.mean_in_system - rate * s.mean_sojourn) <=
        std::max(0.02 * s.mean_in_system, rate * s.ci95_sojourn));
}

TEST_CASE("invalid simulation configs") {
  DesConfig cfg = des(exp_node(1.0), 1.0, 1000, 1);
  CHECK_THROWS_AS(simulate_node(cfg), Error);
  cfg = des(exp_node(1.0), 0.5, 1000, 1);
  cfg.warmup = 1000;
  CHECK_THROWS_AS(simulate_node(cfg), Error);
}

TEST_CASE("waiting occupancy is rate times the P-K wait") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = gridgame::testing::random_instance(rng);
    const GridConfig &c = inst.config;
    for (Index i = 0; i < c.num_schedulers(); ++i) {
      for (Index j = 0; j < c.num_nodes(); ++j) {
        const double load = node_load(j, inst.strategy, c);
        CHECK(waiting_occupancy(i, j, inst.strategy, c) ==
              doctest::Approx(inst.strategy(i, j) * c.schedulers[i].lambda *
                              pk_mean_wait(load, c.nodes[j].service))
                  .epsilon(1e-12));
      }
    }
  }
}
