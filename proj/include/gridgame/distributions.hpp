#pragma once

#include <cstdint>
#include <random>

namespace gridgame {

/// First and second raw moments of a service-time distribution.
struct Moments {
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Bounded Pareto on [k, p_max] with tail shape `shape`.
struct BoundedParetoParams {
  double k = 0.0;
  double p_max = 0.0;
  double shape = 0.0;
};

/// Which closed form to use for the Bounded Pareto mean.
///
/// `kCorrected` normalizes by 1 - (k/p)^shape, which is the pdf's normalizer and
/// reproduces the reference moment values. `kLiteral` normalizes by (k/p)^shape,
/// as the formula is often written; it exists only for comparison.
enum class MomentForm { kCorrected, kLiteral };

Moments exponential_moments(double mu);

/// Throws kSingularShape for shape in {1, 2} and kInvalidParameter for bad bounds.
Moments bounded_pareto_moments(const BoundedParetoParams &params,
                               MomentForm form = MomentForm::kCorrected);

void check_params(const BoundedParetoParams &params);

double bounded_pareto_pdf(const BoundedParetoParams &params, double x);
double bounded_pareto_cdf(const BoundedParetoParams &params, double x);

/// Inverse-CDF transform; `uniform` in [0, 1) maps onto [k, p_max].
double bounded_pareto_sample(const BoundedParetoParams &params, double uniform);

/// Adaptive quadrature of x^order f(x) over [k, p_max]; independent of the closed forms.
double numeric_moment_oracle(const BoundedParetoParams &params, int order);

/// Seeded uniform stream. Bits are converted by hand so sequences do not depend on
/// the standard library's distribution implementations.
class UniformStream {
public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate.
  double exponential(double rate);

private:
  std::mt19937_64 engine_;
};

}  // namespace gridgame
