#pragma once

#include "dpsignal/detection.hpp"
#include "dpsignal/dp_mcmc.hpp"
#include "dpsignal/error.hpp"
#include "dpsignal/matrix.hpp"
#include "dpsignal/stochastic.hpp"
#include "dpsignal/table.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dpsignal {

// ---- BCPNN ----

struct BcpnnResult {
  BinaryMatrix signals;
  Matrix<double> ic_mean;
  Matrix<double> ic_lower; // 2.5% posterior quantile
  Matrix<double> null_prob; // Pr(IC <= 0)
  Matrix<double> adjusted;  // BH-adjusted null_prob
};

// Posterior means of the marginal report probabilities, (1 + n) / (2 + n..).
double bcpnn_margin_mean(std::int64_t margin, std::int64_t grand_total);

BcpnnResult bcpnn_detect(const ContingencyTable &table, double alpha, std::size_t n_mc,
                         RngStream &rng);

// ---- GPS ----

struct GpsHyper {
  double kappa = 0.5;
  double alpha1 = 1.0;
  double beta1 = 1.0;
  double alpha2 = 1.0;
  double beta2 = 1.0;

  void validate() const;
  double prior_mean() const { return kappa * alpha1 / beta1 + (1 - kappa) * alpha2 / beta2; }
};

struct GpsFit {
  GpsHyper hyper;
  double log_likelihood = 0.0;
  std::size_t evaluations = 0;
};

// Raised when no start converges; carries the best parameters seen.
class GpsFitError : public Error {
public:
  GpsFitError(const std::string &what, GpsFit best)
      : Error(ErrorKind::numeric, what), best_(best) {}
  const GpsFit &best() const noexcept { return best_; }

private:
  GpsFit best_;
};

// log NB(n; shape, p = rate / (rate + e)), the Gamma(shape, rate)-Poisson(lambda e)
// marginal.
double log_nb_marginal(std::int64_t n, double e, double shape, double rate);
double gps_log_likelihood(const GpsHyper &h, const Matrix<std::int64_t> &counts,
                          const ExpectedCounts &expected);
GpsFit gps_fit(const ContingencyTable &table);

// Posterior weight of component 1 for one cell.
double gps_posterior_weight(const GpsHyper &h, std::int64_t n, double e);
double gps_posterior_cdf(const GpsHyper &h, std::int64_t n, double e, double x);
double gps_posterior_quantile(const GpsHyper &h, std::int64_t n, double e, double p);

struct GpsResult {
  BinaryMatrix signals;
  Matrix<double> eb05;
  Matrix<double> posterior_mean;
  Matrix<double> weight;
  Matrix<double> null_prob;
  Matrix<double> adjusted;
};

GpsResult gps_detect(const ContingencyTable &table, const GpsHyper &hyper, double alpha);

// ---- ZIP pseudo likelihood-ratio test ----

struct LrtResult {
  std::vector<double> omega_hat;
  Matrix<double> log_lr;
  Matrix<double> p_values;
  double log_mlr = 0.0;
  double global_p_value = 1.0;
  std::vector<double> bootstrap_log_mlr;
  BinaryMatrix signals;
};

double lrt_log_ratio(std::int64_t n, double e);
double zip_profile_loglik(std::span<const std::int64_t> counts, std::span<const double> expected,
                          std::span<const double> lambda, double omega);
double lrt_omega_hat(std::span<const std::int64_t> counts, std::span<const double> expected,
                     std::span<const double> lambda);

// Bootstrap replicate b draws from rng.substream(b), so results do not depend
// on `threads`.
LrtResult pseudo_lrt_detect(const ContingencyTable &table, double alpha, std::size_t n_boot,
                            const RngStream &rng, unsigned threads = 1);

// ---- Local-only DP ----

// Runs the chain with pi fixed at 1 and searches k at p = 0.05 with every
// cell eligible.
DetectionResult dp_hu_detect(const ContingencyTable &table, ModelConfig config, double alpha,
                             RngStream &rng, std::span<const double> k_grid);

} // namespace dpsignal
