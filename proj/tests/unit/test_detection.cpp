#include "doctest.h"
#include "support.hpp"

#include "dpsignal/detection.hpp"
#include "dpsignal/error.hpp"
#include "dpsignal/stochastic.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace dpsignal;

namespace {

// Draws for an rows x cols table from a per-cell generator.
template <class F> PosteriorDraws make_draws(std::size_t n, std::size_t rows, std::size_t cols, F f) {
  PosteriorDraws d;
  d.rows = rows;
  d.cols = cols;
  d.lambda.resize(n * rows * cols);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t c = 0; c < rows * cols; ++c)
      d.lambda[s * rows * cols + c] = f(s, c);
  return d;
}

Matrix<double> row(std::initializer_list<double> v) {
  Matrix<double> m(1, v.size());
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

// Brute-force step-up: adjusted_i = min over j with p_j >= p_i of m * p_j / rank_j.
std::vector<double> bh_brute(const std::vector<double> &p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> ord(m);
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](auto a, auto b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  for (std::size_t r = 0; r < m; ++r) {
    double best = 1.0;
    for (std::size_t s = r; s < m; ++s)
      best = std::min(best, static_cast<double>(m) / static_cast<double>(s + 1) * p[ord[s]]);
    out[ord[r]] = best;
  }
  return out;
}

} // namespace

TEST_CASE("default grids") {
  const auto k = default_k_grid();
  const std::vector<double> expect{1.1,  1.11, 1.12, 1.13, 1.14, 1.16, 1.17, 1.18, 1.19, 1.2,
                                   1.25, 1.28, 1.31, 1.33, 1.36, 1.39, 1.42, 1.44, 1.47, 1.5,
                                   1.6,  1.76, 1.91, 2.07, 2.22, 2.38, 2.53, 2.69, 2.84, 3};
  CHECK(k == expect);
  const auto p = default_p_grid();
  REQUIRE(p.size() == 19);
  for (std::size_t a = 0; a < p.size(); ++a)
    CHECK(p[a] == doctest::Approx(0.01 + 0.005 * static_cast<double>(a)));
}

TEST_CASE("posterior quantiles") {
  const auto c = make_draws(17, 2, 2, [](std::size_t, std::size_t) { return 3.25; });
  for (double p : {0.01, 0.5, 0.99}) {
    const auto m = posterior_quantile_matrix(c, p);
    for (double v : m.data())
      CHECK(v == 3.25);
  }

  const auto five = make_draws(5, 1, 1, [](std::size_t s, std::size_t) { return 5.0 - s; });
  CHECK(posterior_quantile_matrix(five, 0.5)(0, 0) == 3.0);
  CHECK(posterior_quantile_matrix(five, 0.1)(0, 0) == doctest::Approx(1.4));

  RngStream rng(1, 0);
  const auto g = make_draws(10000, 1, 1, [&](std::size_t, std::size_t) {
    return sample_gamma(4.0, 2.0, rng);
  });
  const double oracle = boost::math::gamma_p_inv(4.0, 0.05) / 2.0;
  const double got = posterior_quantile_matrix(g, 0.05)(0, 0);
  CHECK(std::abs(got - oracle) < 0.03);
  CHECK(std::abs(got - 0.6867) < 0.03);

  const std::vector<double> ps{0.05, 0.5};
  const auto many = posterior_quantile_matrices(g, ps);
  CHECK(many[0](0, 0) == posterior_quantile_matrix(g, 0.05)(0, 0));
  CHECK(many[1](0, 0) == posterior_quantile_matrix(g, 0.5)(0, 0));

  CHECK_THROWS_AS(posterior_quantile_matrix(g, 0.0), Error);
  CHECK_THROWS_AS(posterior_quantile_matrix(g, 1.0), Error);
  CHECK_THROWS_AS(posterior_quantile_matrix(PosteriorDraws{}, 0.5), Error);
}

TEST_CASE("null probabilities and means") {
  const auto above = make_draws(10, 1, 2, [](std::size_t, std::size_t) { return 1.5; });
  const auto qa = null_probability_matrix(above);
  for (double q : qa.data())
    CHECK(q == 0.0);
  const auto below = make_draws(10, 1, 2, [](std::size_t, std::size_t) { return 1.0; });
  const auto qb = null_probability_matrix(below);
  for (double q : qb.data())
    CHECK(q == 1.0);
  const auto alt = make_draws(10, 1, 1, [](std::size_t s, std::size_t) { return s % 2 ? 0.5 : 1.5; });
  CHECK(null_probability_matrix(alt)(0, 0) == 0.5);
  CHECK(posterior_mean_matrix(alt)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("estimate_rates by hand") {
  const auto q = row({0.02, 0.5}), t = row({2.5, 1.2});
  BinaryMatrix all(1, 2, 1);
  const auto r = estimate_rates(q, t, 2.0, all);
  CHECK(r.rejections == 1);
  CHECK(r.fdr == 0.02);
  CHECK(r.fnr == 0.5);

  const auto none = estimate_rates(q, t, 10.0, all);
  CHECK(none.rejections == 0);
  CHECK(none.fdr == 0.0);

  const auto zero_q = estimate_rates(row({0.0, 0.0}), t, 1.0, all);
  CHECK(zero_q.rejections == 2);
  CHECK(zero_q.fdr == 0.0);
  CHECK(zero_q.fnr == 0.0);

  // Ineligible cells are always accepted.
  BinaryMatrix first_only(1, 2, 0);
  first_only(0, 1) = 1;
  const auto masked = estimate_rates(q, t, 1.0, first_only);
  CHECK(masked.rejections == 1);
  CHECK(masked.fdr == 0.5);
  CHECK(masked.fnr == doctest::Approx(0.98));

  CHECK_THROWS_AS(estimate_rates(q, row({1.0}), 1.0, all), Error);
}

TEST_CASE("separable posterior flags exactly the signal") {
  // Cell 0: lambda = 5 always (q = 0); cell 1: lambda = 0.1 always (q = 1).
  const auto d = make_draws(50, 1, 2, [](std::size_t, std::size_t c) { return c == 0 ? 5.0 : 0.1; });
  const auto p = default_p_grid(), k = default_k_grid();
  for (double alpha : {0.0, 0.01, 0.05, 0.1, 1.0}) {
    const auto r = grid_search_detect(d, BinaryMatrix{}, alpha, p, k);
    CHECK(r.feasible);
    CHECK(r.signals(0, 0) == 1);
    CHECK(r.signals(0, 1) == 0);
    CHECK(r.fdr_hat == 0.0);
    CHECK(r.fnr_hat == 0.0);
    // Every grid point ties at FNR 0, so the smallest p and largest k win.
    CHECK(r.p_hat == 0.01);
    CHECK(r.k_hat == 3.0);
  }
}

TEST_CASE("all-null posterior rejects nothing") {
  const auto d = make_draws(40, 3, 3, [](std::size_t s, std::size_t) { return 0.2 + 0.01 * s; });
  const auto r = grid_search_detect(d, BinaryMatrix{}, 0.05, default_p_grid(), default_k_grid());
  for (auto v : r.signals.data())
    CHECK(v == 0);
  CHECK(r.fdr_hat <= 0.05);
}

TEST_CASE("eligibility mask keeps n <= 1 cells out of the signal set") {
  Matrix<std::int64_t> n(2, 2);
  n(0, 0) = 1;
  n(0, 1) = 9;
  n(1, 0) = 0;
  n(1, 1) = 30;
  const ContingencyTable table(n, {"a", "b"}, {"x", "y"});
  const auto d = make_draws(20, 2, 2, [](std::size_t, std::size_t) { return 8.0; });
  const auto r = grid_search_detect(d, table, 0.05, default_p_grid(), default_k_grid());
  CHECK(r.signals(0, 0) == 0);
  CHECK(r.signals(1, 0) == 0);
  CHECK(r.signals(0, 1) == 1);
  CHECK(r.signals(1, 1) == 1);
}

TEST_CASE("grid search properties on random posteriors") {
  RngStream rng(2, 0);
  const auto p = default_p_grid(), k = default_k_grid();
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t rows = 3 + rep % 5, cols = 2 + rep % 3;
    std::vector<double> shape(rows * cols), rate(rows * cols);
    for (std::size_t c = 0; c < shape.size(); ++c) {
      shape[c] = 1.0 + 20.0 * rng.uniform();
      rate[c] = 1.0 + 10.0 * rng.uniform();
    }
    const auto d = make_draws(200, rows, cols, [&](std::size_t, std::size_t c) {
      return sample_gamma(shape[c], rate[c], rng);
    });
    BinaryMatrix elig(rows, cols);
    for (auto &v : elig.data())
      v = rng.uniform() < 0.8;
    const double alpha = 0.02 + 0.1 * rng.uniform();
    const auto r = grid_search_detect(d, elig, alpha, p, k);
    if (r.feasible)
      CHECK(r.fdr_hat <= alpha);
    for (std::size_t c = 0; c < elig.size(); ++c)
      if (r.signals.data()[c])
        CHECK(elig.data()[c] == 1);

    // Raising k never grows the rejection set.
    const auto q = null_probability_matrix(d);
    const auto t = posterior_quantile_matrix(d, 0.05);
    std::size_t prev = rows * cols + 1;
    for (double kk : k) {
      const auto e = estimate_rates(q, t, kk, elig);
      CHECK(e.rejections <= prev);
      prev = e.rejections;
    }
  }
}

TEST_CASE("Benjamini-Hochberg") {
  const auto a = bh_adjust(std::vector<double>{0.01, 0.02, 0.03});
  for (double v : a)
    CHECK(v == doctest::Approx(0.03));
  const auto eq = bh_adjust(std::vector<double>{0.4, 0.4, 0.4, 0.4});
  for (double v : eq)
    CHECK(v == doctest::Approx(0.4));
  CHECK(bh_adjust(std::vector<double>{0.7}) == std::vector<double>{0.7});
  CHECK(bh_adjust(std::vector<double>{}).empty());
  CHECK_THROWS_AS(bh_adjust(std::vector<double>{0.5, 1.5}), Error);

  RngStream rng(3, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> p(1 + rng() % 40);
    for (double &v : p)
      v = rng.uniform() < 0.2 ? 0.0 : rng.uniform() * (rng.uniform() < 0.5 ? 0.1 : 1.0);
    if (rep % 7 == 0 && p.size() > 2)
      p[1] = p[0];
    const auto got = bh_adjust(p);
    const auto want = bh_brute(p);
    REQUIRE(got.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      REQUIRE(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      REQUIRE(got[i] <= 1.0);
      REQUIRE(got[i] >= p[i] * (1.0 - 1e-15));
      for (std::size_t j = 0; j < p.size(); ++j)
        if (p[i] < p[j])
          REQUIRE(got[i] <= got[j]);
    }
  }
}
