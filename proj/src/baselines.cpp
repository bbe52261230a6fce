#include "dpsignal/baselines.hpp"

#include "nelder_mead.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

namespace dpsignal {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> flatten_bh(const Matrix<double> &m) { return bh_adjust(m.data()); }

} // namespace

// ---- BCPNN ----

double bcpnn_margin_mean(std::int64_t margin, std::int64_t grand_total) {
  return (1.0 + static_cast<double>(margin)) / (2.0 + static_cast<double>(grand_total));
}

BcpnnResult bcpnn_detect(const ContingencyTable &table, double alpha, std::size_t n_mc,
                         RngStream &rng) {
  if (n_mc < 1000)
    throw validation_error("BCPNN needs at least 1000 Monte Carlo draws");
  const std::size_t I = table.rows(), J = table.cols();
  const double n = static_cast<double>(table.grand_total());
  const double inv_log2 = 1.0 / std::log(2.0);

  BcpnnResult r;
  r.ic_mean = Matrix<double>(I, J);
  r.ic_lower = Matrix<double>(I, J);
  r.null_prob = Matrix<double>(I, J);
  std::vector<double> ic(n_mc);
  for (std::size_t i = 0; i < I; ++i) {
    const double ni = static_cast<double>(table.row_total(i));
    const double mi = bcpnn_margin_mean(table.row_total(i), table.grand_total());
    for (std::size_t j = 0; j < J; ++j) {
      const double nj = static_cast<double>(table.col_total(j));
      const double mj = bcpnn_margin_mean(table.col_total(j), table.grand_total());
      const double nij = static_cast<double>(table.count(i, j));
      const double beta_hat = 1.0 / (mi * mj) - 1.0;
      double sum = 0.0;
      std::size_t nonpos = 0;
      for (std::size_t m = 0; m < n_mc; ++m) {
        const double pi = sample_beta(1.0 + ni, 1.0 + n - ni, rng);
        const double pj = sample_beta(1.0 + nj, 1.0 + n - nj, rng);
        const double pij = sample_beta(1.0 + nij, beta_hat + n - nij, rng);
        const double v = (std::log(pij) - std::log(pi) - std::log(pj)) * inv_log2;
        ic[m] = v;
        sum += v;
        nonpos += v <= 0.0;
      }
      r.ic_mean(i, j) = sum / static_cast<double>(n_mc);
      r.null_prob(i, j) = static_cast<double>(nonpos) / static_cast<double>(n_mc);
      auto k = static_cast<std::size_t>(0.025 * static_cast<double>(n_mc - 1));
      std::nth_element(ic.begin(), ic.begin() + static_cast<std::ptrdiff_t>(k), ic.end());
      r.ic_lower(i, j) = ic[k];
    }
  }
  r.adjusted = Matrix<double>(I, J);
  r.adjusted.data() = flatten_bh(r.null_prob);
  r.signals = BinaryMatrix(I, J, 0);
  for (std::size_t c = 0; c < r.adjusted.size(); ++c)
    r.signals.data()[c] = r.adjusted.data()[c] <= alpha;
  return r;
}

// ---- GPS ----

void GpsHyper::validate() const {
  if (!(kappa >= 0.0 && kappa <= 1.0))
    throw validation_error("GPS mixing weight must lie in [0, 1]");
  for (double v : {alpha1, beta1, alpha2, beta2})
    if (!(v > 0.0) || !std::isfinite(v))
      throw validation_error("GPS gamma parameters must be positive");
}

namespace {

// log Gamma(a + n) - log Gamma(a); Stirling form for large a, where the
// plain difference of lgammas cancels catastrophically.
double log_rising(double a, double n) {
  if (n == 0.0)
    return 0.0;
  if (a < 1e6)
    return std::lgamma(a + n) - std::lgamma(a);
  return (a - 0.5) * std::log1p(n / a) + n * std::log(a + n) - n - n / (12.0 * a * (a + n));
}

} // namespace

double log_nb_marginal(std::int64_t n, double e, double shape, double rate) {
  const double nd = static_cast<double>(n);
  return log_rising(shape, nd) - std::lgamma(nd + 1.0) - shape * std::log1p(e / rate) +
         nd * (std::log(e) - std::log(rate + e));
}

namespace {

double log_mix(double kappa, double l1, double l2) {
  if (kappa <= 0.0)
    return l2;
  if (kappa >= 1.0)
    return l1;
  const double a = std::log(kappa) + l1, b = std::log1p(-kappa) + l2;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

GpsHyper from_free(const std::vector<double> &x) {
  return {logistic(x[0]), std::exp(x[1]), std::exp(x[2]), std::exp(x[3]), std::exp(x[4])};
}

std::vector<double> to_free(const GpsHyper &h) {
  return {std::log(h.kappa / (1.0 - h.kappa)), std::log(h.alpha1), std::log(h.beta1),
          std::log(h.alpha2), std::log(h.beta2)};
}

} // namespace

double gps_log_likelihood(const GpsHyper &h, const Matrix<std::int64_t> &counts,
                          const ExpectedCounts &expected) {
  double ll = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const auto n = counts.data()[c];
    const double e = expected.data()[c];
    ll += log_mix(h.kappa, log_nb_marginal(n, e, h.alpha1, h.beta1),
                  log_nb_marginal(n, e, h.alpha2, h.beta2));
  }
  return ll;
}

GpsFit gps_fit(const ContingencyTable &table) {
  const auto E = expected_counts(table);
  const auto &N = table.counts();
  auto objective = [&](const std::vector<double> &x) {
    for (double v : x)
      if (!std::isfinite(v) || std::abs(v) > 30.0)
        return std::numeric_limits<double>::infinity();
    return -gps_log_likelihood(from_free(x), N, E);
  };

  std::vector<GpsHyper> starts;
  for (double kappa : {0.2, 0.8})
    for (double m1 : {0.5, 2.0})
      for (double m2 : {0.5, 2.0})
        starts.push_back({kappa, 1.0, 1.0 / m1, 1.0, 1.0 / m2});
  starts.push_back({0.5, 1.0, 1.0, 1.0, 1.0});

  GpsFit best;
  best.log_likelihood = -std::numeric_limits<double>::infinity();
  bool any_converged = false;
  std::size_t evals = 0;
  for (const auto &s : starts) {
    // Converge on the objective alone: null-like tables put the optimum on a
    // flat ridge (alpha = beta -> infinity) where the simplex never shrinks.
    constexpr double xtol = std::numeric_limits<double>::infinity();
    auto r = detail::nelder_mead(objective, to_free(s), 0.5, 5000, 1e-10, xtol);
    // One restart from the optimum guards against a collapsed simplex.
    auto r2 = detail::nelder_mead(objective, r.x, 0.1, 5000, 1e-10, xtol);
    evals += r.evaluations + r2.evaluations;
    if (r2.fx > r.fx)
      r2 = r;
    any_converged = any_converged || r2.converged;
    if (-r2.fx > best.log_likelihood) {
      best.hyper = from_free(r2.x);
      best.log_likelihood = -r2.fx;
    }
  }
  best.evaluations = evals;
  auto &h = best.hyper;
  // A component with vanishing weight is unidentified; fold it onto the
  // other so the reported prior is a single gamma.
  if (h.kappa > 1.0 - 1e-9) {
    h.alpha2 = h.alpha1;
    h.beta2 = h.beta1;
  } else if (h.kappa < 1e-9) {
    h.alpha1 = h.alpha2;
    h.beta1 = h.beta2;
  }
  if (h.alpha1 / h.beta1 > h.alpha2 / h.beta2) {
    std::swap(h.alpha1, h.alpha2);
    std::swap(h.beta1, h.beta2);
    h.kappa = 1.0 - h.kappa;
  }
  if (!any_converged || !std::isfinite(best.log_likelihood))
    throw GpsFitError("GPS marginal likelihood optimisation did not converge", best);
  return best;
}

double gps_posterior_weight(const GpsHyper &h, std::int64_t n, double e) {
  if (h.kappa <= 0.0)
    return 0.0;
  if (h.kappa >= 1.0)
    return 1.0;
  const double a = std::log(h.kappa) + log_nb_marginal(n, e, h.alpha1, h.beta1);
  const double b = std::log1p(-h.kappa) + log_nb_marginal(n, e, h.alpha2, h.beta2);
  return 1.0 / (1.0 + std::exp(b - a));
}

double gps_posterior_cdf(const GpsHyper &h, std::int64_t n, double e, double x) {
  if (x <= 0.0)
    return 0.0;
  const double w = gps_posterior_weight(h, n, e);
  const double nd = static_cast<double>(n);
  const double c1 = boost::math::gamma_p(h.alpha1 + nd, (h.beta1 + e) * x);
  const double c2 = boost::math::gamma_p(h.alpha2 + nd, (h.beta2 + e) * x);
  return w * c1 + (1.0 - w) * c2;
}

double gps_posterior_quantile(const GpsHyper &h, std::int64_t n, double e, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw validation_error("quantile level must lie in (0, 1)");
  const double w = gps_posterior_weight(h, n, e);
  const double nd = static_cast<double>(n);
  double hi = w * (h.alpha1 + nd) / (h.beta1 + e) + (1 - w) * (h.alpha2 + nd) / (h.beta2 + e);
  while (gps_posterior_cdf(h, n, e, hi) < p)
    hi *= 2.0;
  double lo = hi;
  while (gps_posterior_cdf(h, n, e, lo) > p && lo > 1e-300)
    lo *= 0.5;
  auto f = [&](double x) { return gps_posterior_cdf(h, n, e, x) - p; };
  std::uintmax_t iters = 500;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

GpsResult gps_detect(const ContingencyTable &table, const GpsHyper &hyper, double alpha) {
  hyper.validate();
  const auto E = expected_counts(table);
  const std::size_t I = table.rows(), J = table.cols();
  GpsResult r;
  r.eb05 = Matrix<double>(I, J);
  r.posterior_mean = Matrix<double>(I, J);
  r.weight = Matrix<double>(I, J);
  r.null_prob = Matrix<double>(I, J);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const auto n = table.count(i, j);
      const double e = E(i, j), nd = static_cast<double>(n);
      const double w = gps_posterior_weight(hyper, n, e);
      r.weight(i, j) = w;
      r.posterior_mean(i, j) = w * (hyper.alpha1 + nd) / (hyper.beta1 + e) +
                               (1 - w) * (hyper.alpha2 + nd) / (hyper.beta2 + e);
      r.eb05(i, j) = gps_posterior_quantile(hyper, n, e, 0.05);
      r.null_prob(i, j) = gps_posterior_cdf(hyper, n, e, 1.0);
    }
  }
  r.adjusted = Matrix<double>(I, J);
  r.adjusted.data() = flatten_bh(r.null_prob);
  r.signals = BinaryMatrix(I, J, 0);
  for (std::size_t c = 0; c < r.adjusted.size(); ++c)
    r.signals.data()[c] = r.adjusted.data()[c] <= alpha;
  return r;
}

// ---- pseudo-LRT ----

double lrt_log_ratio(std::int64_t n, double e) {
  if (!(e > 0.0))
    return 0.0;
  const double nd = static_cast<double>(n);
  const double lam = std::max(1.0, nd / e);
  if (lam == 1.0)
    return 0.0;
  return -(lam - 1.0) * e + nd * std::log(lam);
}

double zip_profile_loglik(std::span<const std::int64_t> counts, std::span<const double> expected,
                          std::span<const double> lambda, double omega) {
  double ll = 0.0;
  const double log_keep = std::log1p(-omega);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double mu = lambda[i] * expected[i];
    if (counts[i] == 0)
      ll += std::log(omega + (1.0 - omega) * std::exp(-mu));
    else
      ll += log_keep + log_poisson_pmf(counts[i], mu);
  }
  return ll;
}

double lrt_omega_hat(std::span<const std::int64_t> counts, std::span<const double> expected,
                     std::span<const double> lambda) {
  if (std::none_of(counts.begin(), counts.end(), [](auto n) { return n == 0; }))
    return 0.0;
  const double upper = 1.0 - 1e-6;
  auto f = [&](double w) { return zip_profile_loglik(counts, expected, lambda, w); };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = upper;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  double best = 0.5 * (a + b), fbest = f(best);
  for (double edge : {0.0, upper}) {
    const double fe = f(edge);
    if (fe >= fbest) {
      best = edge;
      fbest = fe;
    }
  }
  return best;
}

LrtResult pseudo_lrt_detect(const ContingencyTable &table, double alpha, std::size_t n_boot,
                            const RngStream &rng, unsigned threads) {
  if (n_boot < 100)
    throw validation_error("pseudo-LRT needs at least 100 bootstrap replicates");
  const auto E = expected_counts(table);
  const std::size_t I = table.rows(), J = table.cols();
  LrtResult r;
  r.log_lr = Matrix<double>(I, J);
  r.omega_hat.resize(J);
  r.log_mlr = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<std::int64_t> n(I);
    std::vector<double> e(I), lam(I);
    for (std::size_t i = 0; i < I; ++i) {
      n[i] = table.count(i, j);
      e[i] = E(i, j);
      lam[i] = std::max(1.0, static_cast<double>(n[i]) / e[i]);
      r.log_lr(i, j) = lrt_log_ratio(n[i], e[i]);
      r.log_mlr = std::max(r.log_mlr, r.log_lr(i, j));
    }
    r.omega_hat[j] = lrt_omega_hat(n, e, lam);
  }

  r.bootstrap_log_mlr.assign(n_boot, 0.0);
  auto replicate = [&](std::size_t b) {
    RngStream s = rng.substream(b);
    double mlr = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        const bool zero = sample_bernoulli(r.omega_hat[j], s);
        const std::int64_t n = zero ? 0 : sample_poisson(E(i, j), s);
        mlr = std::max(mlr, lrt_log_ratio(n, E(i, j)));
      }
    }
    r.bootstrap_log_mlr[b] = mlr;
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_boot)));
  if (threads == 1) {
    for (std::size_t b = 0; b < n_boot; ++b)
      replicate(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t b = t; b < n_boot; b += threads)
          replicate(b);
      });
    for (auto &th : pool)
      th.join();
  }

  std::vector<double> sorted = r.bootstrap_log_mlr;
  std::sort(sorted.begin(), sorted.end());
  auto tail_fraction = [&](double v) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(n_boot);
  };
  r.global_p_value = tail_fraction(r.log_mlr);
  r.p_values = Matrix<double>(I, J);
  r.signals = BinaryMatrix(I, J, 0);
  const bool global_reject = r.global_p_value <= alpha;
  for (std::size_t c = 0; c < r.log_lr.size(); ++c) {
    r.p_values.data()[c] = tail_fraction(r.log_lr.data()[c]);
    r.signals.data()[c] = global_reject && r.p_values.data()[c] <= alpha;
  }
  return r;
}

// ---- local-only DP ----

DetectionResult dp_hu_detect(const ContingencyTable &table, ModelConfig config, double alpha,
                             RngStream &rng, std::span<const double> k_grid) {
  config.pi_fixed = 1.0;
  const auto draws = LocalGlobalSampler(table, expected_counts(table), config).run(rng);
  const double p[] = {0.05};
  return grid_search_detect(draws, BinaryMatrix{}, alpha, p, k_grid);
}

} // namespace dpsignal
