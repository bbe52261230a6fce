#include "dpsignal/stochastic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

namespace dpsignal {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

using Block = std::array<std::uint32_t, 4>;

Block philox4x32_10(Block ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void require_positive(double v, const char *what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw numeric_error(std::string(what) + " must be positive and finite, got " +
                        std::to_string(v));
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {}

void RngStream::refill() {
  const Block ctr = {static_cast<std::uint32_t>(block_),
                     static_cast<std::uint32_t>(block_ >> 32),
                     static_cast<std::uint32_t>(stream_),
                     static_cast<std::uint32_t>(stream_ >> 32)};
  const auto out = philox4x32_10(
      ctr, {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  ++block_;
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  available_ = 2;
}

RngStream::result_type RngStream::operator()() {
  if (available_ == 0)
    refill();
  return buffer_[2 - available_--];
}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(index + 1)));
}

double sample_normal(RngStream &rng) {
  // Marsaglia polar method; the second variate is discarded so the stream
  // carries no hidden state.
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0)
      return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_log_gamma(double shape, RngStream &rng) {
  require_positive(shape, "gamma shape");
  // Marsaglia & Tsang (2000); shape < 1 via the U^(1/a) boost, in log space
  // so tiny shapes do not underflow.
  const double a = shape < 1.0 ? shape + 1.0 : shape;
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double log_x;
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      log_x = std::log(d * v);
      break;
    }
  }
  if (shape < 1.0)
    log_x += std::log(rng.uniform()) / shape;
  return log_x;
}

double sample_gamma(double shape, double rate, RngStream &rng) {
  require_positive(rate, "gamma rate");
  constexpr double floor_value = 1e-300;
  const double value = std::exp(sample_log_gamma(shape, rng) - std::log(rate));
  return value > floor_value ? value : floor_value;
}

BetaLogDraw sample_beta_log(double a, double b, RngStream &rng) {
  require_positive(a, "beta a");
  require_positive(b, "beta b");
  const double lx = sample_log_gamma(a, rng);
  const double ly = sample_log_gamma(b, rng);
  const double m = std::max(lx, ly);
  const double lse = m + std::log(std::exp(lx - m) + std::exp(ly - m));
  return {lx - lse, ly - lse};
}

double sample_beta(double a, double b, RngStream &rng) {
  require_positive(a, "beta a");
  require_positive(b, "beta b");
  constexpr double eps = 1e-12;
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  const double v = x / (x + y);
  return std::clamp(v, eps, 1.0 - eps);
}

bool sample_bernoulli(double p, RngStream &rng) { return rng.uniform() < p; }

std::size_t sample_categorical(std::span<const double> weights, RngStream &rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw numeric_error("categorical weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0))
    throw numeric_error("categorical weights are all zero");
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t h = 0; h < weights.size(); ++h) {
    if (weights[h] > 0.0) {
      acc += weights[h];
      last_positive = h;
      if (target < acc)
        return h;
    }
  }
  return last_positive;
}

std::size_t sample_categorical_log(std::span<const double> log_weights,
                                   std::span<double> scratch, RngStream &rng) {
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights)
    top = std::max(top, lw);
  if (!std::isfinite(top))
    throw numeric_error("categorical log weights have no finite maximum");
  for (std::size_t h = 0; h < log_weights.size(); ++h)
    scratch[h] = std::exp(log_weights[h] - top);
  return sample_categorical(scratch.first(log_weights.size()), rng);
}

std::vector<double> sample_dirichlet(std::span<const double> concentration,
                                     RngStream &rng) {
  if (concentration.empty())
    throw numeric_error("dirichlet needs at least one component");
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    require_positive(concentration[k], "dirichlet concentration");
    out[k] = sample_gamma(concentration[k], 1.0, rng);
    total += out[k];
  }
  for (double &v : out)
    v /= total;
  return out;
}

std::int64_t sample_binomial(std::int64_t n, double p, RngStream &rng) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0))
    throw numeric_error("binomial parameters out of range");
  if (n == 0 || p == 0.0)
    return 0;
  if (p == 1.0)
    return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(rng);
}

std::int64_t sample_poisson(double mu, RngStream &rng) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw numeric_error("poisson mean must be finite and nonnegative");
  if (mu == 0.0)
    return 0;
  std::poisson_distribution<std::int64_t> dist(mu);
  return dist(rng);
}

std::vector<std::int64_t> sample_multinomial(std::int64_t n,
                                             std::span<const double> probs,
                                             RngStream &rng) {
  if (n < 0)
    throw numeric_error("multinomial size must be nonnegative");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw numeric_error("multinomial probabilities must be finite and nonnegative");
    total += p;
  }
  if (probs.empty() || std::abs(total - 1.0) > 1e-9)
    throw numeric_error("multinomial probabilities must sum to 1");

  // Sequential conditional binomials.
  std::vector<std::int64_t> out(probs.size(), 0);
  std::int64_t remaining = n;
  double mass_left = total;
  for (std::size_t k = 0; k + 1 < probs.size() && remaining > 0; ++k) {
    const double p = mass_left > 0.0 ? std::min(1.0, probs[k] / mass_left) : 0.0;
    out[k] = sample_binomial(remaining, p, rng);
    remaining -= out[k];
    mass_left -= probs[k];
  }
  if (remaining > 0)
    out.back() += remaining;
  return out;
}

double log_poisson_pmf(std::int64_t n, double mu) {
  if (n < 0 || !(mu >= 0.0))
    throw numeric_error("log_poisson_pmf: negative argument");
  if (mu == 0.0)
    return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  return nd * std::log(mu) - mu - std::lgamma(nd + 1.0);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0))
    return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double log_half_cauchy_pdf(double x, double scale) {
  if (x < 0.0)
    return -std::numeric_limits<double>::infinity();
  const double r = x / scale;
  return std::log(2.0 / (M_PI * scale)) - std::log1p(r * r);
}

void SliceConfig::validate() const {
  if (!(initial_width > 0.0))
    throw numeric_error("slice initial_width must be positive");
  if (max_stepping_out < 1)
    throw numeric_error("slice max_stepping_out must be at least 1");
}

} // namespace dpsignal
