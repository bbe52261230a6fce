#pragma once

#include "dpsignal/table.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace testsupport {

inline std::string data_path(const std::string &name) {
  return std::string(DPSIGNAL_TEST_DATA) + "/" + name;
}

inline dpsignal::ContingencyTable statin_table() {
  return dpsignal::read_table_csv(data_path("statin46.csv"));
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)> &cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double f = cdf(xs[k]);
    d = std::max({d, (k + 1) / n - f, f - k / n});
  }
  return d;
}

// Asymptotic 1% critical value.
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

inline double mean(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double> &v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v)
    s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)> &f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k)
    s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Batch-means standard error of the mean of an autocorrelated series.
inline double batch_se(const std::vector<double> &v, std::size_t batches = 50) {
  const std::size_t b = v.size() / batches;
  std::vector<double> m(batches, 0.0);
  for (std::size_t k = 0; k < batches; ++k) {
    for (std::size_t t = 0; t < b; ++t)
      m[k] += v[k * b + t];
    m[k] /= static_cast<double>(b);
  }
  return std::sqrt(variance(m) / static_cast<double>(batches));
}

} // namespace testsupport
