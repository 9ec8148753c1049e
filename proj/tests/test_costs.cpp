#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gridgame/costs.hpp"
#include "gridgame/queueing.hpp"
#include "oracles.hpp"

using namespace gridgame;
using gridgame::testing::make_exponential_config;
using gridgame::testing::random_instance;

namespace {

StrategyMatrix ones(Index n, Index m) { return StrategyMatrix::Constant(n, m, 1.0 / m); }

}  // namespace

TEST_CASE("transmission and network cost") {
  GridConfig c = make_exponential_config({10.0}, {1.0});
  c.links[0] = {0, 0, 0.1, 100.0};
  c.schedulers[0].bits = 10.0;
  CHECK(transmission_time(0, 0, 0.0, c) == 0.0);
  CHECK(transmission_time(0, 0, 0.5, c) == doctest::Approx(0.1));
  CHECK(network_cost(0, 0, 0.0, c) == 0.0);

  c.constants = {1.0, 0.0, 1.0};
  CHECK(network_cost(0, 0, 0.5, c) == doctest::Approx(transmission_time(0, 0, 0.5, c)));

  c.links[0].delay = 0.0;
  CHECK(transmission_time(0, 0, 1.0, c) == doctest::Approx(10.0 / 100.0));
  c.constants = {1.0, 1.0, 0.0};
  CHECK(network_cost(0, 0, 0.3, c) == doctest::Approx(10.0 * 0.3).epsilon(1e-14));
}

TEST_CASE("occupancies") {
  GridConfig c = make_exponential_config({50.0}, {10.0});
  CHECK(service_occupancy(0, 0, 0.0, c) == 0.0);
  CHECK(service_occupancy(0, 0, 0.5, c) == doctest::Approx(0.1));
  c = make_exponential_config({10.0}, {10.0});
  CHECK(service_occupancy(0, 0, 1.0, c) == doctest::Approx(1.0));

  // h = 0.5, second moment 0.5 is an exponential node with rate 2:
  // 1 * 1 * 0.5 * 1 / (2 * (1 - 0.5)).
  c = make_exponential_config({2.0}, {1.0});
  StrategyMatrix a = StrategyMatrix::Ones(1, 1);
  CHECK(waiting_occupancy(0, 0, a, c) == doctest::Approx(0.5));

  c = make_exponential_config({2.0, 2.0}, {1.0, 1.0});
  a.resize(2, 2);
  a << 0.0, 1.0, 0.5, 0.5;
  CHECK(waiting_occupancy(0, 0, a, c) == 0.0);
}

TEST_CASE("waiting term diverges and then refuses") {
  GridConfig c = make_exponential_config({1.0}, {0.5});
  StrategyMatrix a = StrategyMatrix::Ones(1, 1);
  double previous = 0.0;
  for (double lambda : {0.5, 0.9, 0.99, 0.999999}) {
    c.schedulers[0].lambda = lambda;
    const double w = waiting_occupancy(0, 0, a, c);
    CHECK(w > previous);
    previous = w;
  }
  CHECK(previous > 1e5);
  for (double lambda : {1.0 - 1e-10, 1.0, 2.0}) {
    c.schedulers[0].lambda = lambda;
    try {
      (void)power_cost(0, 0, a, c);
      FAIL("expected UnstableNode");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kUnstableNode);
    }
    CHECK_THROWS_AS((void)loss_cost(0, 0, a, c), Error);
    CHECK_THROWS_AS((void)utilization_cost(0, 0, a, c), Error);
    CHECK_THROWS_AS((void)per_task_power_cost(0, a, c), Error);
  }
}

TEST_CASE("power, loss and utilisation examples") {
  GridConfig c = make_exponential_config({4.0, 5.0}, {1.0, 2.0});
  StrategyMatrix a(2, 2);
  a << 0.0, 1.0, 0.4, 0.6;
  CHECK(power_cost(0, 0, a, c) == 0.0);
  CHECK(loss_cost(0, 0, a, c) == 0.0);
  CHECK(utilization_cost(0, 0, a, c) == 0.0);

  c.nodes[1].p_idle_wait = 0.0;
  CHECK(power_cost(1, 1, a, c) == doctest::Approx(service_occupancy(1, 1, 0.6, c)));

  // Equal power draws and c_r / MTTF = c_p p make loss track power.
  c = make_exponential_config({4.0, 5.0}, {1.0, 2.0});
  c.constants.c_p = 2.0;
  for (auto &n : c.nodes) {
    n.p_busy = n.p_idle_wait = 0.75;
    n.c_r = 3.0;
    n.mttf = 2.0;
  }
  const double ratio = (3.0 / 2.0) / (2.0 * 0.75);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 0; j < 2; ++j) {
      CHECK(loss_cost(i, j, a, c) == doctest::Approx(ratio * power_cost(i, j, a, c)).epsilon(1e-14));
    }
  }
  c.nodes[1].mttf = std::numeric_limits<double>::infinity();
  CHECK(loss_cost(1, 1, a, c) == 0.0);

  // c_f = rho = 1, C_i / C_j = 1, B_i / D_j = 0.
  c = make_exponential_config({4.0}, {1.0});
  c.nodes[0].disk_capacity = std::numeric_limits<double>::infinity();
  StrategyMatrix half = StrategyMatrix::Constant(1, 1, 0.5);
  CHECK(utilization_cost(0, 0, half, c) == doctest::Approx(0.5 * service_occupancy(0, 0, 0.5, c)));
  c.schedulers[0].compute_demand = 0.0;
  CHECK(utilization_cost(0, 0, half, c) == 0.0);
}

TEST_CASE("single node closed form") {
  GridConfig c = make_exponential_config({3.0}, {1.2});
  c.constants.c_p = 1.7;
  c.nodes[0].p_busy = 0.4;
  c.nodes[0].p_idle_wait = 2.5;
  const double h = 1.0 / 3.0, h2 = 2.0 / 9.0, lambda = 1.2;
  const StrategyMatrix a = StrategyMatrix::Ones(1, 1);
  const double expected = 1.7 * (0.4 * h + 2.5 * h2 * lambda / (2.0 * (1.0 - h * lambda)));
  CHECK(per_task_power_cost(0, a, c) == doctest::Approx(expected).epsilon(1e-14));

  // All constants one: the per-task power cost is the M/M/1 sojourn time.
  GridConfig mm1 = make_exponential_config({3.0}, {1.2});
  CHECK(per_task_power_cost(0, a, mm1) == doctest::Approx(1.0 / (3.0 - 1.2)).epsilon(1e-14));

  const CostBreakdown whole = scheduler_cost(0, a, mm1);
  CHECK(whole.power == doctest::Approx(power_cost(0, 0, a, mm1)));
  CHECK(whole.network == doctest::Approx(network_cost(0, 0, 1.0, mm1)));
}

TEST_CASE("empty queue limit") {
  GridConfig c = make_exponential_config({4.0, 8.0}, {1e-9});
  c.nodes[1].p_busy = 3.0;
  StrategyMatrix a(1, 2);
  a << 0.3, 0.7;
  const double limit = 0.3 * 1.0 * 0.25 + 0.7 * 3.0 * 0.125;
  CHECK(per_task_power_cost(0, a, c) == doctest::Approx(limit).epsilon(1e-8));
  const CostBreakdown b = scheduler_cost(0, a, c);
  CHECK(b.power < 1e-8);
  CHECK(b.loss < 1e-8);
  CHECK(b.utilization < 1e-8);
}

TEST_CASE("breakdown arithmetic") {
  CostBreakdown x{1, 2, 3, 4, 10};
  x += CostBreakdown{1, 1, 1, 1, 4};
  CHECK(x.total == 14.0);
  const CostBreakdown y = x.scaled(0.5);
  CHECK(y.power == 1.0);
  CHECK(y.total == 7.0);
}

TEST_CASE("expression and scalar genericity") {
  const GridConfig c = make_exponential_config({4.0, 5.0}, {1.0, 2.0});
  StrategyMatrix a(2, 2);
  a << 0.3, 0.7, 0.4, 0.6;
  const double direct = per_task_power_cost(1, a, c);
  CHECK(per_task_power_cost(1, a.block(0, 0, 2, 2), c) == direct);
  const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> wide = a.cast<long double>();
  CHECK(static_cast<double>(per_task_power_cost(1, wide, c)) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(per_task_power_cost(1, (a * 1.0).eval(), c) == direct);
}

TEST_CASE("properties on random feasible strategies") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng);
    GridConfig &c = inst.config;
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (auto &n : c.nodes) {
      n.c_r = u(rng);
      n.mttf = 0.5 + u(rng);
      n.c_f = u(rng);
      n.rho_util = u(rng);
    }
    for (auto &l : c.links) {
      l.delay = u(rng);
      l.bandwidth = 0.5 + u(rng);
    }
    const StrategyMatrix &a = inst.strategy;
    for (Index i = 0; i < c.num_schedulers(); ++i) {
      const CostBreakdown b = scheduler_cost(i, a, c);
      CHECK(b.total == b.power + b.network + b.loss + b.utilization);
      CHECK(b.power >= 0.0);
      CHECK(b.network >= 0.0);
      CHECK(b.loss >= 0.0);
      CHECK(b.utilization >= 0.0);

      double power_sum = 0.0;
      for (Index j = 0; j < c.num_nodes(); ++j) power_sum += power_cost(i, j, a, c);
      CHECK(c.schedulers[i].lambda * per_task_power_cost(i, a, c) ==
            doctest::Approx(power_sum).epsilon(1e-12));

      for (Index j = 0; j < c.num_nodes(); ++j) {
        const double s = a(i, j);
        CHECK(transmission_time(i, j, 2 * s, c) == 2 * transmission_time(i, j, s, c));
        CHECK(network_cost(i, j, 2 * s, c) == 2 * network_cost(i, j, s, c));
        CHECK(service_occupancy(i, j, 2 * s, c) == 2 * service_occupancy(i, j, s, c));

        // F_ij2 is the slice's rate times the P-K wait at the node.
        const double load = node_load(j, a, c);
        CHECK(waiting_occupancy(i, j, a, c) ==
              doctest::Approx(s * c.schedulers[i].lambda * pk_mean_wait(load, c.nodes[j].service))
                  .epsilon(1e-12));
      }
    }

    // Monotone in every entry, by forward differences that stay feasible.
    const double h = 1e-6;
    for (Index k = 0; k < c.num_schedulers(); ++k) {
      for (Index j = 0; j < c.num_nodes(); ++j) {
        StrategyMatrix up = a;
        up(k, j) += h;
        if (node_load(j, up, c) * c.nodes[j].service.mean >= 1.0 - 1e-3) continue;
        for (Index i = 0; i < c.num_schedulers(); ++i) {
          CHECK(power_cost(i, j, up, c) >= power_cost(i, j, a, c));
          CHECK(loss_cost(i, j, up, c) >= loss_cost(i, j, a, c));
        }
      }
    }

    // Convex in own entries.
    for (Index i = 0; i < c.num_schedulers(); ++i) {
      for (Index j = 0; j < c.num_nodes(); ++j) {
        const double step = 1e-4;
        if (a(i, j) < step) continue;
        StrategyMatrix up = a, down = a;
        up(i, j) += step;
        down(i, j) -= step;
        if (node_load(j, up, c) * c.nodes[j].service.mean >= 1.0 - 1e-3) continue;
        const double second = per_task_power_cost(i, up, c) - 2 * per_task_power_cost(i, a, c) +
                              per_task_power_cost(i, down, c);
        CHECK(second >= -1e-9);
      }
    }
  }
}

TEST_CASE("zero slices cost nothing") {
  const GridConfig c = make_exponential_config({4.0, 5.0, 6.0}, {1.0, 2.0});
  StrategyMatrix a = ones(2, 3);
  a.row(0) << 0.0, 0.5, 0.5;
  CHECK(power_cost(0, 0, a, c) == 0.0);
  CHECK(network_cost(0, 0, a(0, 0), c) == 0.0);
}
