#include "gridgame/distributions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridgame/error.hpp"

namespace gridgame {

namespace {

bool near(double x, double y) { return std::abs(x - y) < 1e-12; }

}  // namespace

Moments exponential_moments(double mu) {
  if (!(mu > 0.0)) {
    throw Error(ErrorCode::kNonPositiveRate, "exponential rate must be positive");
  }
  const double mean = 1.0 / mu;
  return {mean, 2.0 * mean * mean};
}

void check_params(const BoundedParetoParams &params) {
  if (!(params.k > 0.0) || !(params.p_max > params.k)) {
    std::ostringstream os;
    os << "bounded pareto needs 0 < k < p_max (k=" << params.k << ", p_max=" << params.p_max << ")";
    throw Error(ErrorCode::kInvalidParameter, os.str());
  }
  if (!(params.shape > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "bounded pareto shape must be positive");
  }
  if (near(params.shape, 1.0) || near(params.shape, 2.0)) {
    throw Error(ErrorCode::kSingularShape, "moment formulas are singular at shape 1 and 2");
  }
}

Moments bounded_pareto_moments(const BoundedParetoParams &params, MomentForm form) {
  check_params(params);
  const double a = params.shape;
  const double k = params.k;
  const double p = params.p_max;

  if (form == MomentForm::kLiteral) {
    const double norm = std::pow(k, a) / std::pow(k / p, a);
    return {a / (a - 1.0) * norm * (std::pow(k, 1.0 - a) - std::pow(p, 1.0 - a)),
            a / (2.0 - a) * norm * (std::pow(p, 2.0 - a) - std::pow(k, 2.0 - a))};
  }

  // Written in terms of L = log(p/k) with expm1 so the k -> p point-mass limit
  // does not lose digits to cancellation.
  const double log_ratio = std::log(p / k);
  const double denom = -std::expm1(-a * log_ratio);  // 1 - (k/p)^a
  const double mean = a / (a - 1.0) * k * -std::expm1((1.0 - a) * log_ratio) / denom;
  const double second = a / (2.0 - a) * k * k * std::expm1((2.0 - a) * log_ratio) / denom;
  return {mean, second};
}

double bounded_pareto_pdf(const BoundedParetoParams &params, double x) {
  if (x < params.k || x > params.p_max) return 0.0;
  const double a = params.shape;
  return a * std::pow(params.k, a) * std::pow(x, -a - 1.0) /
         (1.0 - std::pow(params.k / params.p_max, a));
}

double bounded_pareto_cdf(const BoundedParetoParams &params, double x) {
  if (x <= params.k) return 0.0;
  if (x >= params.p_max) return 1.0;
  const double a = params.shape;
  return (1.0 - std::pow(params.k / x, a)) / (1.0 - std::pow(params.k / params.p_max, a));
}

double bounded_pareto_sample(const BoundedParetoParams &params, double uniform) {
  const double a = params.shape;
  const double tail = 1.0 - std::pow(params.k / params.p_max, a);
  const double x = params.k / std::pow(1.0 - uniform * tail, 1.0 / a);
  return std::min(std::max(x, params.k), params.p_max);
}

double numeric_moment_oracle(const BoundedParetoParams &params, int order) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::kInvalidParameter, "moment order must be 1 or 2");
  }
  if (!(params.k > 0.0) || !(params.p_max > params.k) || !(params.shape > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "bad bounded pareto parameters");
  }
  // Integrate in log space: x = e^s, dx = e^s ds. The integrand becomes a smooth
  // exponential in s, which Gauss-Kronrod handles over the whole [k, p] range.
  const double a = params.shape;
  const double scale = a * std::pow(params.k, a) / -std::expm1(a * std::log(params.k / params.p_max));
  auto integrand = [&](double s) { return scale * std::exp((order - a) * s); };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, std::log(params.k), std::log(params.p_max), 15, 1e-10, &error);
}

double UniformStream::exponential(double rate) { return -std::log1p(-next()) / rate; }

}  // namespace gridgame
