#include "doctest.h"
#include "support.hpp"

#include "dpsignal/error.hpp"
#include "dpsignal/stochastic.hpp"

#include <cmath>
#include <numeric>

using namespace dpsignal;
using testsupport::mean;
using testsupport::variance;

TEST_CASE("streams are reproducible and distinct") {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differ_c = false, differ_d = false;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a();
    CHECK(x == b());
    differ_c |= x != c();
    differ_d |= x != d();
  }
  CHECK(differ_c);
  CHECK(differ_d);
  CHECK(a.substream(5)() == b.substream(5)());
  CHECK(a.substream(5)() != a.substream(6)());
}

TEST_CASE("independent streams are uncorrelated") {
  RngStream a(1, 0), b(1, 1);
  std::vector<double> x(100000), y(100000);
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = a.uniform();
    y[k] = b.uniform();
  }
  const double mx = mean(x), my = mean(y);
  double cov = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    cov += (x[k] - mx) * (y[k] - my);
  cov /= static_cast<double>(x.size());
  CHECK(std::abs(cov / (1.0 / 12.0)) < 0.015);
}

TEST_CASE("uniform is strictly inside (0,1) and KS-uniform") {
  RngStream rng(9, 0);
  std::vector<double> u(100000);
  for (double &v : u) {
    v = rng.uniform();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  CHECK(testsupport::ks_statistic(u, [](double x) { return x; }) <
        testsupport::ks_critical_1pct(u.size()));
}

TEST_CASE("gamma moments") {
  RngStream rng(11, 0);
  std::vector<double> g(100000);
  for (double &v : g)
    v = sample_gamma(4.0, 2.0, rng);
  CHECK(std::abs(mean(g) - 2.0) < 0.02);

  std::size_t above = 0;
  for (int k = 0; k < 100000; ++k)
    above += sample_gamma(1.0, 1.0, rng) > 1.0;
  CHECK(std::abs(above / 1e5 - std::exp(-1.0)) < 0.005);

  std::vector<double> s(1000000);
  for (double &v : s)
    v = sample_gamma(0.3, 0.3, rng);
  CHECK(std::abs(mean(s) - 1.0) < 0.01);
  CHECK(std::abs(variance(s) / (1.0 / 0.3) - 1.0) < 0.05);
}

TEST_CASE("gamma with tiny shape stays positive") {
  RngStream rng(12, 0);
  for (int k = 0; k < 10000; ++k) {
    const double v = sample_gamma(1e-4, 1.0, rng);
    REQUIRE(v >= 1e-300);
    REQUIRE(std::isfinite(v));
  }
}

TEST_CASE("gamma parameter errors") {
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample_gamma(0.0, 1.0, rng), Error);
  CHECK_THROWS_AS(sample_gamma(1.0, -1.0, rng), Error);
  CHECK_THROWS_AS(sample_beta(0.0, 1.0, rng), Error);
  CHECK_THROWS_AS(sample_dirichlet(std::vector<double>{1.0, 0.0}, rng), Error);
}

TEST_CASE("beta draws") {
  RngStream rng(13, 0);
  std::vector<double> u(100000);
  for (double &v : u)
    v = sample_beta(1.0, 1.0, rng);
  CHECK(testsupport::ks_statistic(u, [](double x) { return x; }) <
        testsupport::ks_critical_1pct(u.size()));

  std::vector<double> b(100000);
  for (double &v : b)
    v = sample_beta(1.0, 3.0, rng);
  CHECK(std::abs(mean(b) - 0.25) < 0.005);

  // I_0.5(2, 5) by integrating the Beta(2, 5) density.
  const double norm = std::tgamma(7.0) / (std::tgamma(2.0) * std::tgamma(5.0));
  const double oracle = testsupport::simpson(
      [&](double x) { return norm * x * std::pow(1 - x, 4); }, 0.0, 0.5);
  std::size_t below = 0;
  for (int k = 0; k < 100000; ++k)
    below += sample_beta(2.0, 5.0, rng) <= 0.5;
  CHECK(std::abs(below / 1e5 - oracle) < 0.01);

  for (int k = 0; k < 10000; ++k) {
    const double v = sample_beta(1e-3, 1e-3, rng);
    REQUIRE(v >= 1e-12);
    REQUIRE(v <= 1.0 - 1e-12);
  }
}

TEST_CASE("categorical") {
  RngStream rng(14, 0);
  const std::vector<double> deg{0, 1, 0};
  for (int k = 0; k < 1000; ++k)
    REQUIRE(sample_categorical(deg, rng) == 1);

  const std::vector<double> flat{1, 1, 1, 1};
  std::vector<double> f(4, 0.0);
  for (int k = 0; k < 100000; ++k)
    f[sample_categorical(flat, rng)] += 1e-5;
  for (double v : f)
    CHECK(std::abs(v - 0.25) < 0.01);

  const std::vector<double> w{0.7, 0.2, 0.1};
  std::vector<double> g(3, 0.0);
  for (int k = 0; k < 100000; ++k)
    g[sample_categorical(w, rng)] += 1e-5;
  for (int h = 0; h < 3; ++h)
    CHECK(std::abs(g[h] - w[h]) < 0.01);

  CHECK_THROWS_AS(sample_categorical(std::vector<double>{0, 0}, rng), Error);
}

TEST_CASE("log categorical survives huge log weights") {
  RngStream rng(15, 0);
  const std::vector<double> lw{-1e6, -1e6 + std::log(3.0), -std::numeric_limits<double>::infinity()};
  std::vector<double> scratch(3);
  double ones = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const auto h = sample_categorical_log(lw, scratch, rng);
    REQUIRE(h < 2);
    ones += h == 1;
  }
  CHECK(std::abs(ones / 1e5 - 0.75) < 0.01);
}

TEST_CASE("dirichlet") {
  RngStream rng(16, 0);
  const auto one = sample_dirichlet(std::vector<double>{1.0}, rng);
  CHECK(one.size() == 1);
  CHECK(one[0] == 1.0);

  for (const std::vector<double> &conc : {std::vector<double>{5, 5}, std::vector<double>{2, 3, 5}}) {
    const double total = std::accumulate(conc.begin(), conc.end(), 0.0);
    std::vector<double> m(conc.size(), 0.0);
    for (int k = 0; k < 100000; ++k) {
      const auto p = sample_dirichlet(conc, rng);
      REQUIRE(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
      for (std::size_t c = 0; c < p.size(); ++c)
        m[c] += p[c] / 1e5;
    }
    for (std::size_t c = 0; c < conc.size(); ++c)
      CHECK(std::abs(m[c] - conc[c] / total) < 0.01);
  }
}

TEST_CASE("multinomial") {
  RngStream rng(17, 0);
  const std::vector<double> half{0.5, 0.5};
  const auto z = sample_multinomial(0, half, rng);
  CHECK(z == std::vector<std::int64_t>{0, 0});
  const auto big = sample_multinomial(1000000, half, rng);
  CHECK(big[0] + big[1] == 1000000);
  CHECK(std::abs(big[0] - 500000) < 3000);
  const auto deg = sample_multinomial(100, std::vector<double>{1, 0, 0}, rng);
  CHECK(deg == std::vector<std::int64_t>{100, 0, 0});
  CHECK_THROWS_AS(sample_multinomial(10, std::vector<double>{0.5, 0.4}, rng), Error);

  std::vector<double> p{0.1, 0.0, 0.35, 0.05, 0.5};
  for (int k = 0; k < 1000; ++k) {
    const auto n = 1 + static_cast<std::int64_t>(rng() % 100000);
    const auto c = sample_multinomial(n, p, rng);
    REQUIRE(std::accumulate(c.begin(), c.end(), std::int64_t{0}) == n);
    REQUIRE(c[1] == 0);
  }
}

TEST_CASE("log poisson pmf") {
  CHECK(log_poisson_pmf(0, 2.0) == doctest::Approx(-2.0));
  CHECK(log_poisson_pmf(3, 3.0) == doctest::Approx(std::log(27.0 / 6.0) - 3.0).epsilon(1e-14));
  CHECK(log_poisson_pmf(3, 3.0) == doctest::Approx(-1.4959).epsilon(1e-4));
  CHECK(log_poisson_pmf(0, 0.0) == 0.0);
  CHECK(log_poisson_pmf(2, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(log_poisson_pmf(-1, 1.0), Error);
  CHECK_THROWS_AS(log_poisson_pmf(1, -1.0), Error);
}

TEST_CASE("half-Cauchy density integrates to one") {
  const double s = 0.5;
  // Substitute x = s tan(u) to integrate over [0, inf).
  const double total = testsupport::simpson(
      [&](double u) {
        const double x = s * std::tan(u);
        return std::exp(log_half_cauchy_pdf(x, s)) * s / (std::cos(u) * std::cos(u));
      },
      0.0, M_PI / 2 - 1e-9);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("slice sampler: standard normal") {
  RngStream rng(18, 0);
  SliceConfig cfg;
  cfg.lower_bound = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  std::vector<double> xs(100000);
  for (double &v : xs)
    v = x = slice_sample_step([](double t) { return -0.5 * t * t; }, x, cfg, rng);
  CHECK(std::abs(mean(xs)) < 0.02);
  CHECK(std::abs(variance(xs) - 1.0) < 0.05);
  std::vector<double> thin;
  for (std::size_t k = 0; k < xs.size(); k += 10)
    thin.push_back(xs[k]);
  CHECK(testsupport::ks_statistic(thin, [](double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }) <
        testsupport::ks_critical_1pct(thin.size()));
}

TEST_CASE("slice sampler: gamma(3,1) above zero") {
  RngStream rng(19, 0);
  SliceConfig cfg;
  double x = 1.0;
  std::vector<double> xs(100000);
  for (double &v : xs) {
    v = x = slice_sample_step([](double t) { return 2.0 * std::log(t) - t; }, x, cfg, rng);
    REQUIRE(v > 0.0);
  }
  CHECK(std::abs(mean(xs) - 3.0) < 0.05);
  std::vector<double> thin;
  for (std::size_t k = 0; k < xs.size(); k += 10)
    thin.push_back(xs[k]);
  auto cdf = [](double t) { return 1.0 - std::exp(-t) * (1.0 + t + t * t / 2.0); };
  CHECK(testsupport::ks_statistic(thin, cdf) < testsupport::ks_critical_1pct(thin.size()));
}

TEST_CASE("slice sampler: flat density on (0,1)") {
  RngStream rng(20, 0);
  SliceConfig cfg;
  double x = 0.5;
  std::vector<double> xs(100000);
  for (double &v : xs) {
    v = x = slice_sample_step(
        [](double t) { return t < 1.0 ? 0.0 : -std::numeric_limits<double>::infinity(); }, x, cfg,
        rng);
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
  CHECK(testsupport::ks_statistic(xs, [](double t) { return t; }) <
        testsupport::ks_critical_1pct(xs.size()));
}

TEST_CASE("slice sampler errors") {
  RngStream rng(21, 0);
  SliceConfig cfg;
  CHECK_THROWS_AS(slice_sample_step([](double) { return 0.0; }, -1.0, cfg, rng), Error);
  CHECK_THROWS_AS(
      slice_sample_step([](double) { return -std::numeric_limits<double>::infinity(); }, 1.0, cfg,
                        rng),
      Error);
  cfg.initial_width = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.initial_width = 1.0;
  cfg.max_stepping_out = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("determinism of composite samplers") {
  auto run = [] {
    RngStream rng(99, 7);
    std::vector<double> out;
    for (int k = 0; k < 100; ++k) {
      out.push_back(sample_gamma(0.7, 1.3, rng));
      out.push_back(sample_beta(2.0, 3.0, rng));
      out.push_back(static_cast<double>(sample_poisson(4.5, rng)));
      out.push_back(static_cast<double>(sample_binomial(1000, 0.3, rng)));
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("log-space beta keeps the tail that the clamped draw loses") {
  // For Beta(1, b), -log(1 - v) is Exponential(b).
  RngStream rng(77, 0);
  const double b = 0.01;
  std::vector<double> e(50000);
  for (auto &x : e) {
    const auto d = sample_beta_log(1.0, b, rng);
    REQUIRE(std::abs(std::exp(d.log_v) + std::exp(d.log_1mv) - 1.0) < 1e-12);
    x = -d.log_1mv;
  }
  CHECK(testsupport::mean(e) == doctest::Approx(1.0 / b).epsilon(0.03));
}
