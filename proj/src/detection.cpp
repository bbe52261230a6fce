#include "dpsignal/detection.hpp"

#include "dpsignal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dpsignal {

namespace {

void check_sorted_nonempty(std::span<const double> grid, const char *name) {
  if (grid.empty())
    throw validation_error(std::string(name) + " grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw validation_error(std::string(name) + " grid must be sorted ascending");
}

void check_draws(const PosteriorDraws &draws) {
  if (draws.n_draws() == 0)
    throw validation_error("posterior draws are empty");
}

} // namespace

std::vector<double> default_k_grid() {
  return {1.1,  1.11, 1.12, 1.13, 1.14, 1.16, 1.17, 1.18, 1.19, 1.2,
          1.25, 1.28, 1.31, 1.33, 1.36, 1.39, 1.42, 1.44, 1.47, 1.5,
          1.6,  1.76, 1.91, 2.07, 2.22, 2.38, 2.53, 2.69, 2.84, 3.0};
}

std::vector<double> default_p_grid() {
  std::vector<double> out;
  for (int k = 2; k <= 20; ++k)
    out.push_back(k * 5 / 1000.0);
  return out;
}

double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw validation_error("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<Matrix<double>> posterior_quantile_matrices(const PosteriorDraws &draws,
                                                        std::span<const double> ps) {
  check_draws(draws);
  for (double p : ps)
    if (!(p > 0.0 && p < 1.0))
      throw validation_error("quantile level must lie in (0, 1)");
  const std::size_t I = draws.rows, J = draws.cols, S = draws.n_draws();
  std::vector<Matrix<double>> out(ps.size(), Matrix<double>(I, J));
  std::vector<double> cell(S);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      for (std::size_t d = 0; d < S; ++d)
        cell[d] = draws.at(d, i, j);
      std::sort(cell.begin(), cell.end());
      for (std::size_t k = 0; k < ps.size(); ++k)
        out[k](i, j) = sorted_quantile(cell, ps[k]);
    }
  }
  return out;
}

Matrix<double> posterior_quantile_matrix(const PosteriorDraws &draws, double p) {
  const double ps[] = {p};
  return std::move(posterior_quantile_matrices(draws, ps)[0]);
}

Matrix<double> posterior_mean_matrix(const PosteriorDraws &draws) {
  check_draws(draws);
  Matrix<double> m(draws.rows, draws.cols, 0.0);
  for (std::size_t d = 0; d < draws.n_draws(); ++d) {
    const auto dr = draws.draw(d);
    for (std::size_t c = 0; c < dr.size(); ++c)
      m.data()[c] += dr[c];
  }
  for (double &v : m.data())
    v /= static_cast<double>(draws.n_draws());
  return m;
}

Matrix<double> null_probability_matrix(const PosteriorDraws &draws) {
  check_draws(draws);
  Matrix<double> q(draws.rows, draws.cols, 0.0);
  for (std::size_t d = 0; d < draws.n_draws(); ++d) {
    const auto dr = draws.draw(d);
    for (std::size_t c = 0; c < dr.size(); ++c)
      if (dr[c] <= 1.0)
        q.data()[c] += 1.0;
  }
  for (double &v : q.data())
    v /= static_cast<double>(draws.n_draws());
  return q;
}

RateEstimate estimate_rates(const Matrix<double> &q, const Matrix<double> &t, double k,
                            const BinaryMatrix &eligible) {
  if (!q.same_shape(t) || (eligible.size() != 0 && (eligible.rows() != q.rows() ||
                                                     eligible.cols() != q.cols())))
    throw validation_error("rate estimation inputs are not conformable");
  double fd = 0.0, fn = 0.0;
  std::size_t rej = 0, acc = 0;
  for (std::size_t c = 0; c < q.size(); ++c) {
    const bool ok = eligible.size() == 0 || eligible.data()[c];
    if (ok && t.data()[c] > k) {
      fd += q.data()[c];
      ++rej;
    } else {
      fn += 1.0 - q.data()[c];
      ++acc;
    }
  }
  RateEstimate r;
  r.rejections = rej;
  r.fdr = rej ? fd / static_cast<double>(rej) : 0.0;
  r.fnr = acc ? fn / static_cast<double>(acc) : 0.0;
  return r;
}

BinaryMatrix eligibility_mask(const ContingencyTable &table) {
  BinaryMatrix m(table.rows(), table.cols(), 0);
  for (std::size_t i = 0; i < table.rows(); ++i)
    for (std::size_t j = 0; j < table.cols(); ++j)
      m(i, j) = table.count(i, j) > 1;
  return m;
}

DetectionResult grid_search_detect(const PosteriorDraws &draws, const BinaryMatrix &eligible,
                                   double alpha, std::span<const double> p_grid,
                                   std::span<const double> k_grid) {
  check_sorted_nonempty(p_grid, "p");
  check_sorted_nonempty(k_grid, "k");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw validation_error("FDR cap alpha must lie in [0, 1]");

  DetectionResult res;
  res.q = null_probability_matrix(draws);
  res.signals = BinaryMatrix(draws.rows, draws.cols, 0);
  const auto t_all = posterior_quantile_matrices(draws, p_grid);

  bool found = false;
  std::size_t best_p = 0, best_k = 0;
  RateEstimate best{};
  for (std::size_t a = 0; a < p_grid.size(); ++a) {
    for (std::size_t b = k_grid.size(); b-- > 0;) {
      const auto r = estimate_rates(res.q, t_all[a], k_grid[b], eligible);
      if (r.fdr > alpha)
        continue;
      // Strict improvement keeps the earlier (smaller p, larger k) point on ties.
      if (!found || r.fnr < best.fnr) {
        found = true;
        best = r;
        best_p = a;
        best_k = b;
      }
    }
  }

  res.feasible = found;
  if (!found) {
    res.fnr_hat = estimate_rates(res.q, t_all[0], std::numeric_limits<double>::infinity(),
                                 eligible)
                      .fnr;
    return res;
  }
  res.p_hat = p_grid[best_p];
  res.k_hat = k_grid[best_k];
  res.fdr_hat = best.fdr;
  res.fnr_hat = best.fnr;
  const auto &t = t_all[best_p];
  for (std::size_t c = 0; c < t.size(); ++c) {
    const bool ok = eligible.size() == 0 || eligible.data()[c];
    res.signals.data()[c] = ok && t.data()[c] > res.k_hat;
  }
  return res;
}

DetectionResult grid_search_detect(const PosteriorDraws &draws, const ContingencyTable &table,
                                   double alpha, std::span<const double> p_grid,
                                   std::span<const double> k_grid) {
  if (draws.rows != table.rows() || draws.cols != table.cols())
    throw validation_error("draws dimensions do not match the table");
  return grid_search_detect(draws, eligibility_mask(table), alpha, p_grid, k_grid);
}

std::vector<double> bh_adjust(std::span<const double> probs) {
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0))
      throw validation_error("BH input outside [0, 1]");
  const std::size_t m = probs.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double v = probs[order[r]] * static_cast<double>(m) / static_cast<double>(r + 1);
    running = std::min(running, v);
    out[order[r]] = std::min(running, 1.0);
  }
  return out;
}

} // namespace dpsignal
