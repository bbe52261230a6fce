#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace dpsignal::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Converges when both the spread of function values and the
// simplex diameter fall below their tolerances.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double> &)> &f,
                                    std::vector<double> start, double step = 0.5,
                                    std::size_t max_evals = 20000, double ftol = 1e-10,
                                    double xtol = 1e-8) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t k = 0; k < n; ++k)
    pts[k + 1][k] += step;
  NelderMeadResult res;
  auto eval = [&](const std::vector<double> &x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<double> fv(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    fv[k] = eval(pts[k]);

  std::vector<std::size_t> idx(n + 1);
  while (res.evaluations < max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const auto best = idx[0], worst = idx[n], second = idx[n - 1];

    double diam = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t d = 0; d < n; ++d)
        diam = std::max(diam, std::abs(pts[idx[k]][d] - pts[best][d]));
    if (std::abs(fv[worst] - fv[best]) <= ftol * (1.0 + std::abs(fv[best])) && diam <= xtol) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t d = 0; d < n; ++d)
        centroid[d] += pts[idx[k]][d] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d)
        x[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
      return x;
    };

    auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    auto xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      auto &p = pts[idx[k]];
      for (std::size_t d = 0; d < n; ++d)
        p[d] = pts[best][d] + 0.5 * (p[d] - pts[best][d]);
      fv[idx[k]] = eval(p);
    }
  }
  const auto b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = pts[b];
  res.fx = fv[b];
  return res;
}

} // namespace dpsignal::detail
