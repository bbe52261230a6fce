#pragma once

#include "dpsignal/matrix.hpp"
#include "dpsignal/stochastic.hpp"
#include "dpsignal/table.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpsignal {

enum class Likelihood { poisson, zip };

struct ModelConfig {
  Likelihood likelihood = Likelihood::poisson;
  std::size_t truncation = 0; // K; 0 selects max(ceil(log(I*J)), 10)
  double psi_alpha = 3.0;     // Exponential rate prior on every concentration
  double psi_beta = 0.5;      // half-Cauchy scale on every base shape
  double psi_tau = 0.5;       // half-Cauchy scale on the reference shrinkage
  std::optional<double> pi_fixed; // 1 gives the local-only model
  double a_pi = 1.0;
  double b_pi = 1.0;
  // Holds every base shape at this value instead of slice sampling it. Only
  // used by conjugacy checks.
  std::optional<double> beta_fixed;
  SliceConfig slice{};
  std::size_t n_burn = 5000;
  std::size_t n_keep = 10000;
  std::size_t thin = 1;

  void validate() const;
};

std::size_t default_truncation(std::size_t rows, std::size_t cols);

// Finite stick-breaking approximation of one DP(alpha, Gamma(beta, beta)).
struct DpBlock {
  std::vector<double> weights;
  std::vector<double> sticks;
  std::vector<double> atoms;
  std::vector<std::size_t> allocations;
  double alpha = 1.0;
  double beta = 1.0;

  std::size_t truncation() const noexcept { return atoms.size(); }
  std::size_t occupied() const;
  void recompute_weights();
  // Throws numeric_error on a violated invariant.
  void check_invariants() const;
};

struct BlockObservations {
  std::span<const double> counts;
  std::span<const double> exposure;
  std::span<const unsigned char> include;
};

struct DpPriors {
  double psi_alpha = 3.0;
  double psi_beta = 0.5;
  std::optional<double> beta_fixed;
};

// Per-atom sufficient statistics seen by the atom full conditional.
struct AtomStats {
  std::vector<double> count_sum;
  std::vector<double> exposure_sum;
  std::vector<std::size_t> occupancy;
};

// One sweep over a DP block: allocations, atoms, base shape (slice),
// sticks, concentration. Returns lambda_i = atom of allocation i.
std::vector<double> dpsb_update(DpBlock &block, const BlockObservations &obs,
                                const DpPriors &priors, const SliceConfig &slice,
                                RngStream &rng, AtomStats *stats = nullptr);

struct McmcState {
  std::vector<DpBlock> local_blocks; // one per drug column
  DpBlock global_block;
  Matrix<double> lambda_local;         // I x D
  std::vector<double> lambda_global;   // I
  BinaryMatrix z;                      // I x D, 1 = local
  double pi = 0.5;
  std::vector<double> lambda_ref;      // I
  double tau = 1.0;
  BinaryMatrix y;                      // I x J structural-zero indicators
  std::vector<double> omega;           // J
  Matrix<double> lambda;               // I x J realized strengths

  void check_invariants() const;
};

struct PosteriorDraws {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> lambda; // draw-major, each draw row-major I x J
  std::vector<std::string> trace_names;
  std::vector<std::vector<double>> traces;
  std::uint64_t iterations = 0;
  std::uint64_t slice_updates = 0;

  std::size_t n_draws() const noexcept {
    return rows * cols == 0 ? 0 : lambda.size() / (rows * cols);
  }
  double at(std::size_t d, std::size_t i, std::size_t j) const {
    return lambda[(d * rows + i) * cols + j];
  }
  std::span<const double> draw(std::size_t d) const {
    return {lambda.data() + d * rows * cols, rows * cols};
  }
  const std::vector<double> *trace(std::string_view name) const;
};

// Gibbs/slice sampler for the local-global DP Poisson and ZIP models. Column
// `reference` receives the Gamma(tau, tau) shrinkage prior; every other
// column is a drug with its own local DP.
class LocalGlobalSampler {
public:
  LocalGlobalSampler(const ContingencyTable &table, ExpectedCounts expected,
                     ModelConfig config);
  // Lower-level form without table validation (zero margins allowed).
  LocalGlobalSampler(const Matrix<std::int64_t> &counts, ExpectedCounts expected,
                     std::size_t reference, ModelConfig config);

  const ModelConfig &config() const noexcept { return config_; }
  std::size_t truncation() const noexcept { return K_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<std::size_t> &drug_columns() const noexcept { return drugs_; }
  std::size_t reference_column() const noexcept { return reference_; }

  void set_counts(const Matrix<std::int64_t> &counts);

  McmcState init_state(RngStream &rng) const;
  void poisson_iteration(McmcState &state, RngStream &rng) const;
  void zip_iteration(McmcState &state, RngStream &rng) const;
  void iterate(McmcState &state, RngStream &rng) const;

  // Collects n_keep draws after n_burn iterations. The observer, when given,
  // sees the state after every retained iteration.
  PosteriorDraws run(RngStream &rng,
                     const std::function<void(const McmcState &)> &observer = {}) const;

private:
  void lg_core(McmcState &state, const BinaryMatrix &active, RngStream &rng) const;
  DpBlock init_block(std::span<const double> counts, std::span<const double> exposure,
                     std::span<const unsigned char> include, RngStream &rng) const;
  DpPriors priors() const;

  ModelConfig config_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t reference_ = 0;
  std::size_t K_ = 0;
  std::vector<std::size_t> drugs_;
  Matrix<double> counts_;
  ExpectedCounts expected_;
};

McmcState init_state(const ContingencyTable &table, const ExpectedCounts &expected,
                     const ModelConfig &config, RngStream &rng);
void poisson_lg_iteration(McmcState &state, const ContingencyTable &table,
                          const ExpectedCounts &expected, const ModelConfig &config,
                          RngStream &rng);
void zip_iteration(McmcState &state, const ContingencyTable &table,
                   const ExpectedCounts &expected, const ModelConfig &config,
                   RngStream &rng);
PosteriorDraws run_chain(const ContingencyTable &table, const ModelConfig &config,
                         RngStream &rng);

// Deterministic 1-D Lloyd k-means, centres seeded at evenly spaced quantiles.
// Returns the centres and each point's cluster index; clusters that empty
// out are dropped.
struct KMeans1d {
  std::vector<double> centers;
  std::vector<std::size_t> labels;
};
KMeans1d kmeans_1d(std::span<const double> points, std::size_t k);

// Maximum likelihood beta for atoms ~ Gamma(beta, beta), clamped to
// [1e-3, 1e3].
double gamma_unit_mean_mle(std::span<const double> atoms);

} // namespace dpsignal
