#pragma once

#include "dpsignal/dp_mcmc.hpp"
#include "dpsignal/matrix.hpp"
#include "dpsignal/table.hpp"

#include <span>
#include <utility>
#include <vector>

namespace dpsignal {

struct DetectionResult {
  double p_hat = 0.0;
  double k_hat = 0.0;
  BinaryMatrix signals;
  Matrix<double> q;
  double fdr_hat = 0.0;
  double fnr_hat = 0.0;
  bool feasible = false;
};

struct RateEstimate {
  double fdr = 0.0;
  double fnr = 0.0;
  std::size_t rejections = 0;
};

std::vector<double> default_k_grid();
std::vector<double> default_p_grid();

// Per-cell type-7 empirical quantile of the retained draws.
Matrix<double> posterior_quantile_matrix(const PosteriorDraws &draws, double p);
// Several quantile levels at once, sorting each cell's draws only once.
std::vector<Matrix<double>> posterior_quantile_matrices(const PosteriorDraws &draws,
                                                        std::span<const double> ps);
Matrix<double> posterior_mean_matrix(const PosteriorDraws &draws);
// Fraction of draws with lambda <= 1.
Matrix<double> null_probability_matrix(const PosteriorDraws &draws);

// Type-7 quantile of an ascending sample.
double sorted_quantile(std::span<const double> sorted, double p);

RateEstimate estimate_rates(const Matrix<double> &q, const Matrix<double> &t, double k,
                            const BinaryMatrix &eligible);

// Cells with n_ij > 1.
BinaryMatrix eligibility_mask(const ContingencyTable &table);

// FNR-optimal (p, k) among grid points whose estimated FDR is at most alpha.
// Ties: smallest p, then largest k. An empty mask means every cell is eligible.
DetectionResult grid_search_detect(const PosteriorDraws &draws, const BinaryMatrix &eligible,
                                   double alpha, std::span<const double> p_grid,
                                   std::span<const double> k_grid);
DetectionResult grid_search_detect(const PosteriorDraws &draws, const ContingencyTable &table,
                                   double alpha, std::span<const double> p_grid,
                                   std::span<const double> k_grid);

// Step-up Benjamini-Hochberg adjustment, returned in input order.
std::vector<double> bh_adjust(std::span<const double> probs);

} // namespace dpsignal
