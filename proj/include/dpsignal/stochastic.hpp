#pragma once

#include "dpsignal/error.hpp"

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace dpsignal {

// Philox4x32-10 counter-based generator. The key is the user seed and the
// upper half of the counter is the stream id, so (seed, stream_id) pairs
// address disjoint, independent sequences without any jump-ahead.
class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  // Independent child stream, e.g. one per replicate.
  RngStream substream(std::uint64_t index) const;

private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
};

double sample_normal(RngStream &rng);
// Gamma(shape, rate); mean shape / rate. Draws are floored at 1e-300.
double sample_gamma(double shape, double rate, RngStream &rng);
// Beta(a, b), clamped to [1e-12, 1 - 1e-12].
double sample_beta(double a, double b, RngStream &rng);

// log Gamma(shape, 1) variate, accurate when the variate itself underflows.
double sample_log_gamma(double shape, RngStream &rng);

struct BetaLogDraw {
  double log_v;
  double log_1mv;
};
// Beta(a, b) returned as (log v, log(1 - v)), exact near either endpoint.
BetaLogDraw sample_beta_log(double a, double b, RngStream &rng);
bool sample_bernoulli(double p, RngStream &rng);
std::size_t sample_categorical(std::span<const double> weights, RngStream &rng);
// Categorical draw from unnormalised log weights (-inf allowed), using
// max-subtraction. `scratch` must have the same length.
std::size_t sample_categorical_log(std::span<const double> log_weights,
                                   std::span<double> scratch, RngStream &rng);
std::vector<double> sample_dirichlet(std::span<const double> concentration,
                                     RngStream &rng);
std::vector<std::int64_t> sample_multinomial(std::int64_t n,
                                             std::span<const double> probs,
                                             RngStream &rng);
std::int64_t sample_binomial(std::int64_t n, double p, RngStream &rng);
std::int64_t sample_poisson(double mu, RngStream &rng);

// log of the Poisson(mu) pmf at n. 0 when n = 0 and mu = 0; -inf when
// n > 0 and mu = 0.
double log_poisson_pmf(std::int64_t n, double mu);
double log_gamma_pdf(double x, double shape, double rate);
// Half-Cauchy(0, scale) log density, x >= 0.
double log_half_cauchy_pdf(double x, double scale);

struct SliceConfig {
  double initial_width = 1.0;
  int max_stepping_out = 50;
  double lower_bound = 0.0;

  void validate() const;
};

// One stepping-out and shrinkage slice update (Neal 2003) of a univariate
// target. Points at or below config.lower_bound have zero density.
template <class LogDensity>
  requires std::invocable<LogDensity &, double>
double slice_sample_step(LogDensity &&log_density, double current,
                         const SliceConfig &config, RngStream &rng) {
  config.validate();
  if (!(current > config.lower_bound))
    throw numeric_error("slice sampler: current point is not above the lower bound");
  const double f0 = log_density(current);
  if (!std::isfinite(f0))
    throw numeric_error("slice sampler: log density is not finite at the current point");

  auto logf = [&](double x) {
    return x > config.lower_bound ? static_cast<double>(log_density(x))
                                  : -std::numeric_limits<double>::infinity();
  };

  // Vertical level: log y = log f(x0) - Exp(1).
  const double level = f0 + std::log(rng.uniform());

  const double w = config.initial_width;
  double left = current - w * rng.uniform();
  double right = left + w;
  auto steps_left = static_cast<long>(std::floor(config.max_stepping_out * rng.uniform()));
  auto steps_right = static_cast<long>(config.max_stepping_out - 1) - steps_left;

  while (steps_left > 0 && left > config.lower_bound && logf(left) > level) {
    left -= w;
    --steps_left;
  }
  while (steps_right > 0 && logf(right) > level) {
    right += w;
    --steps_right;
  }
  if (left < config.lower_bound)
    left = config.lower_bound;

  for (int guard = 0; guard < 10000; ++guard) {
    const double x = left + (right - left) * rng.uniform();
    if (x > config.lower_bound && logf(x) >= level)
      return x;
    if (x < current)
      left = x;
    else
      right = x;
  }
  return current;
}

} // namespace dpsignal
