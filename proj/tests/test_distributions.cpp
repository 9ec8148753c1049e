#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gridgame/distributions.hpp"
#include "gridgame/error.hpp"

using namespace gridgame;

namespace {

ErrorCode code_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kParse;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("exponential moments") {
  auto m = exponential_moments(1.0);
  CHECK(m.mean == 1.0);
  CHECK(m.second_moment == 2.0);
  m = exponential_moments(2.0);
  CHECK(m.mean == 0.5);
  CHECK(m.second_moment == 0.5);
  m = exponential_moments(35.0);
  CHECK(m.mean == doctest::Approx(0.028571).epsilon(1e-4));
  CHECK(m.second_moment == doctest::Approx(0.0016327).epsilon(1e-4));
  CHECK(code_of([] { exponential_moments(0.0); }) == ErrorCode::kNonPositiveRate);
  CHECK(code_of([] { exponential_moments(-1.0); }) == ErrorCode::kNonPositiveRate);

  for (double mu : {0.3, 1.7, 35.0, 46.0, 1e3}) {
    const auto e = exponential_moments(mu);
    CHECK(e.second_moment == 2.0 * e.mean * e.mean);
  }
}

TEST_CASE("bounded pareto moments reproduce the moment table") {
  // Reference values from an independent evaluation of the normalised pdf.
  struct Row {
    double k, p, mean, second;
  };
  const Row rows[] = {{0.001, 0.07, 0.0038434, 5.5236e-5},
                      {0.002, 0.08, 0.0069063, 1.3263e-4},
                      {0.003, 0.09, 0.0097456, 2.2930e-4},
                      {0.004, 0.10, 0.0124713, 3.4478e-4}};
  for (const Row &r : rows) {
    const auto m = bounded_pareto_moments({r.k, r.p, 1.1});
    CHECK(rel(m.mean, r.mean) < 1e-4);
    CHECK(rel(m.second_moment, r.second) < 1e-4);
  }
  // Printed values, 0.5% tolerance.
  auto m = bounded_pareto_moments({0.001, 0.07, 1.1});
  CHECK(rel(m.mean, 0.003843) < 5e-3);
  CHECK(rel(m.second_moment, 5.52e-5) < 5e-3);
  m = bounded_pareto_moments({0.004, 0.1, 1.1});
  CHECK(rel(m.mean, 0.012471) < 5e-3);
  CHECK(rel(m.second_moment, 3.45e-4) < 5e-3);
}

TEST_CASE("literal normaliser differs from the corrected one") {
  const BoundedParetoParams p{0.001, 0.07, 1.1};
  const auto corrected = bounded_pareto_moments(p);
  const auto literal = bounded_pareto_moments(p, MomentForm::kLiteral);
  const double ratio = std::pow(p.k / p.p_max, p.shape);
  CHECK(literal.mean == doctest::Approx(corrected.mean * (1.0 - ratio) / ratio).epsilon(1e-12));
  CHECK(rel(literal.mean, 0.003843) > 1.0);
}

TEST_CASE("bounded pareto point-mass limit") {
  const double k = 0.01;
  const auto m = bounded_pareto_moments({k, k * (1.0 + 1e-9), 1.5});
  CHECK(rel(m.mean, k) < 1e-8);
  CHECK(rel(m.second_moment, k * k) < 1e-8);
}

TEST_CASE("bounded pareto parameter checks") {
  CHECK(code_of([] { bounded_pareto_moments({0.001, 0.07, 1.0}); }) == ErrorCode::kSingularShape);
  CHECK(code_of([] { bounded_pareto_moments({0.001, 0.07, 2.0}); }) == ErrorCode::kSingularShape);
  CHECK(code_of([] { bounded_pareto_moments({0.07, 0.001, 1.1}); }) == ErrorCode::kInvalidParameter);
  CHECK(code_of([] { bounded_pareto_moments({0.0, 0.07, 1.1}); }) == ErrorCode::kInvalidParameter);
  CHECK(code_of([] { bounded_pareto_moments({0.001, 0.07, -1.0}); }) == ErrorCode::kInvalidParameter);
  CHECK_NOTHROW(bounded_pareto_moments({0.001, 0.07, 2.5}));
  CHECK_NOTHROW(bounded_pareto_moments({0.001, 0.07, 0.5}));
}

TEST_CASE("closed form agrees with quadrature on random parameters") {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> shape(1.01, 1.9);
  std::uniform_real_distribution<double> logk(std::log(1e-4), std::log(1.0));
  std::uniform_real_distribution<double> logspan(std::log(1.5), std::log(1e3));
  int checked = 0;
  while (checked < 100) {
    const double a = shape(rng);
    if (std::abs(a - 1.0) < 0.02 || std::abs(a - 2.0) < 0.02) continue;
    const double k = std::exp(logk(rng));
    const BoundedParetoParams p{k, k * std::exp(logspan(rng)), a};
    const auto m = bounded_pareto_moments(p);
    CHECK(rel(m.mean, numeric_moment_oracle(p, 1)) < 1e-6);
    CHECK(rel(m.second_moment, numeric_moment_oracle(p, 2)) < 1e-6);
    CHECK(m.second_moment >= m.mean * m.mean);
    ++checked;
  }
}

TEST_CASE("quadrature oracle on the first table row") {
  const BoundedParetoParams p{0.001, 0.07, 1.1};
  CHECK(rel(numeric_moment_oracle(p, 1), 0.003843) < 5e-4);
  CHECK(rel(numeric_moment_oracle(p, 2), 5.52e-5) < 5e-3);
  const double k = 0.02;
  CHECK(rel(numeric_moment_oracle({k, k * (1.0 + 1e-9), 1.1}, 1), k) < 1e-8);
  CHECK(code_of([&] { numeric_moment_oracle(p, 3); }) == ErrorCode::kInvalidParameter);
}

TEST_CASE("pdf and cdf") {
  const BoundedParetoParams p{0.002, 0.08, 1.1};
  CHECK(bounded_pareto_cdf(p, p.k) == doctest::Approx(0.0));
  CHECK(bounded_pareto_cdf(p, p.p_max) == doctest::Approx(1.0));
  CHECK(bounded_pareto_cdf(p, 0.5 * p.k) == 0.0);
  CHECK(bounded_pareto_cdf(p, 2.0 * p.p_max) == 1.0);
  CHECK(bounded_pareto_pdf(p, 0.5 * p.k) == 0.0);
  CHECK(bounded_pareto_pdf(p, 2.0 * p.p_max) == 0.0);
  // Derivative of the cdf is the pdf.
  for (double x : {0.003, 0.01, 0.05}) {
    const double h = 1e-7;
    const double slope = (bounded_pareto_cdf(p, x + h) - bounded_pareto_cdf(p, x - h)) / (2 * h);
    CHECK(rel(slope, bounded_pareto_pdf(p, x)) < 1e-6);
  }
}

TEST_CASE("inverse cdf sampling") {
  const BoundedParetoParams p{0.001, 0.07, 1.1};
  CHECK(bounded_pareto_sample(p, 0.0) == p.k);
  CHECK(bounded_pareto_sample(p, std::nextafter(1.0, 0.0)) == doctest::Approx(p.p_max).epsilon(1e-6));
  for (double u : {0.1, 0.37, 0.5, 0.9}) {
    const double x = bounded_pareto_sample(p, u);
    CHECK(x >= p.k);
    CHECK(x <= p.p_max);
    CHECK(bounded_pareto_cdf(p, x) == doctest::Approx(u).epsilon(1e-10));
  }
}

TEST_CASE("sample mean and Kolmogorov-Smirnov statistic") {
  const BoundedParetoParams p{0.001, 0.07, 1.1};
  UniformStream stream(7);
  const int n = 1'000'000;
  std::vector<double> xs(n);
  double sum = 0.0;
  for (double &x : xs) {
    x = bounded_pareto_sample(p, stream.next());
    sum += x;
  }
  CHECK(rel(sum / n, 0.003843) < 0.01);

  xs.resize(100'000);
  std::sort(xs.begin(), xs.end());
  const double count = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = bounded_pareto_cdf(p, xs[i]);
    d = std::max({d, f - i / count, (i + 1) / count - f});
  }
  // 1% critical value of the one-sample statistic for large n.
  CHECK(d < 1.628 / std::sqrt(count));
}

TEST_CASE("uniform stream is seeded and bounded") {
  UniformStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.next();
  }
  CHECK(differs);
  UniformStream e(3);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) sum += e.exponential(4.0);
  CHECK(sum / 200000 == doctest::Approx(0.25).epsilon(0.01));
}
