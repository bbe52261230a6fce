#include "dpsignal/dp_mcmc.hpp"

#include "dpsignal/error.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dpsignal {

namespace {

constexpr double kTauFloor = 1e-8;
constexpr double kStickEps = 1e-12;

// log of prod_h Gamma(x_h | s, s) up to the data-only term, as a function of
// the shared shape s, from sum(log x) and sum(x).
double log_gamma_shape_target(double s, std::size_t n, double sum_log, double sum,
                              double prior_scale) {
  const double nd = static_cast<double>(n);
  return nd * (s * std::log(s) - std::lgamma(s)) + (s - 1.0) * sum_log - s * sum +
         log_half_cauchy_pdf(s, prior_scale);
}

void sticks_from_weights(DpBlock &b) {
  const std::size_t K = b.weights.size();
  b.sticks.assign(K, 1.0);
  double remaining = 1.0;
  for (std::size_t h = 0; h + 1 < K; ++h) {
    double v = remaining > 0.0 ? b.weights[h] / remaining : 1.0;
    v = std::clamp(v, kStickEps, 1.0 - kStickEps);
    b.sticks[h] = v;
    remaining *= 1.0 - v;
  }
  b.recompute_weights();
}

double bernoulli_log_odds_prob(double log_a, double log_b) {
  // P(choose a) for weights exp(log_a), exp(log_b).
  if (log_a == -std::numeric_limits<double>::infinity())
    return 0.0;
  if (log_b == -std::numeric_limits<double>::infinity())
    return 1.0;
  return 1.0 / (1.0 + std::exp(log_b - log_a));
}

} // namespace

void ModelConfig::validate() const {
  auto positive = [](double v, const char *name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw validation_error(std::string(name) + " must be positive");
  };
  positive(psi_alpha, "psi_alpha");
  positive(psi_beta, "psi_beta");
  positive(psi_tau, "psi_tau");
  positive(a_pi, "a_pi");
  positive(b_pi, "b_pi");
  if (pi_fixed && !(*pi_fixed >= 0.0 && *pi_fixed <= 1.0))
    throw validation_error("pi_fixed must lie in [0, 1]");
  if (beta_fixed)
    positive(*beta_fixed, "beta_fixed");
  if (n_keep < 1)
    throw validation_error("n_keep must be at least 1");
  if (thin < 1)
    throw validation_error("thin must be at least 1");
  try {
    slice.validate();
  } catch (const Error &e) {
    throw validation_error(e.what());
  }
}

std::size_t default_truncation(std::size_t rows, std::size_t cols) {
  const double l = std::ceil(std::log(static_cast<double>(rows) * static_cast<double>(cols)));
  return std::max<std::size_t>(static_cast<std::size_t>(std::max(l, 1.0)), 10);
}

std::size_t DpBlock::occupied() const {
  std::vector<unsigned char> seen(atoms.size(), 0);
  std::size_t n = 0;
  for (auto s : allocations)
    if (!seen[s]++)
      ++n;
  return n;
}

void DpBlock::recompute_weights() {
  weights.resize(sticks.size());
  double remaining = 1.0;
  for (std::size_t h = 0; h < sticks.size(); ++h) {
    weights[h] = sticks[h] * remaining;
    remaining *= 1.0 - sticks[h];
  }
}

void DpBlock::check_invariants() const {
  const std::size_t K = atoms.size();
  if (K == 0 || weights.size() != K || sticks.size() != K)
    throw numeric_error("DP block vectors have inconsistent lengths");
  if (sticks.back() != 1.0)
    throw numeric_error("last stick must equal 1");
  double remaining = 1.0, total = 0.0;
  for (std::size_t h = 0; h < K; ++h) {
    if (!(sticks[h] > 0.0 && sticks[h] <= 1.0))
      throw numeric_error("stick outside (0, 1]");
    if (std::abs(weights[h] - sticks[h] * remaining) > 1e-12)
      throw numeric_error("weights do not match sticks");
    remaining *= 1.0 - sticks[h];
    total += weights[h];
    if (!(atoms[h] > 0.0) || !std::isfinite(atoms[h]))
      throw numeric_error("atom is not positive and finite");
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw numeric_error("weights do not sum to 1");
  for (auto s : allocations)
    if (s >= K)
      throw numeric_error("allocation out of range");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw numeric_error("concentration and base shape must be positive");
}

std::vector<double> dpsb_update(DpBlock &block, const BlockObservations &obs,
                                const DpPriors &priors, const SliceConfig &slice,
                                RngStream &rng, AtomStats *stats) {
  const std::size_t K = block.atoms.size();
  const std::size_t N = obs.counts.size();
  if (obs.exposure.size() != N || obs.include.size() != N)
    throw numeric_error("block observation spans differ in length");
  block.allocations.resize(N);

  std::vector<double> log_eta(K), log_theta(K), scratch(K), lw(K);
  for (std::size_t h = 0; h < K; ++h) {
    log_eta[h] = std::log(block.weights[h]);
    log_theta[h] = std::log(block.atoms[h]);
  }

  // 1. allocations
  for (std::size_t i = 0; i < N; ++i) {
    if (obs.include[i]) {
      const double n = obs.counts[i], e = obs.exposure[i];
      for (std::size_t h = 0; h < K; ++h)
        lw[h] = log_eta[h] + n * log_theta[h] - block.atoms[h] * e;
      block.allocations[i] = sample_categorical_log(lw, scratch, rng);
    } else {
      block.allocations[i] = sample_categorical(block.weights, rng);
    }
  }

  // 2. atoms
  std::vector<double> nsum(K, 0.0), esum(K, 0.0);
  std::vector<std::size_t> occ(K, 0);
  for (std::size_t i = 0; i < N; ++i) {
    const auto h = block.allocations[i];
    ++occ[h];
    if (obs.include[i]) {
      nsum[h] += obs.counts[i];
      esum[h] += obs.exposure[i];
    }
  }
  for (std::size_t h = 0; h < K; ++h)
    block.atoms[h] = sample_gamma(nsum[h] + block.beta, esum[h] + block.beta, rng);
  if (stats) {
    stats->count_sum = nsum;
    stats->exposure_sum = esum;
    stats->occupancy = occ;
  }

  // 3. base shape
  if (priors.beta_fixed) {
    block.beta = *priors.beta_fixed;
  } else {
    double sum_log = 0.0, sum = 0.0;
    for (double t : block.atoms) {
      sum_log += std::log(t);
      sum += t;
    }
    block.beta = slice_sample_step(
        [&](double s) {
          return log_gamma_shape_target(s, K, sum_log, sum, priors.psi_beta);
        },
        block.beta, slice, rng);
  }

  // 4. sticks
  std::size_t tail = N;
  double log_rest = 0.0;
  for (std::size_t h = 0; h + 1 < K; ++h) {
    tail -= occ[h];
    const auto v = sample_beta_log(1.0 + static_cast<double>(occ[h]),
                                   block.alpha + static_cast<double>(tail), rng);
    // The stored stick is clamped away from 1; the concentration update uses
    // the exact log(1 - v).
    block.sticks[h] = std::clamp(std::exp(v.log_v), 1e-300, 1.0 - 1e-16);
    log_rest += v.log_1mv;
  }
  block.sticks[K - 1] = 1.0;
  block.recompute_weights();

  // 5. concentration
  block.alpha = sample_gamma(static_cast<double>(K), priors.psi_alpha - log_rest, rng);

  std::vector<double> lambda(N);
  for (std::size_t i = 0; i < N; ++i)
    lambda[i] = block.atoms[block.allocations[i]];
  return lambda;
}

void McmcState::check_invariants() const {
  global_block.check_invariants();
  for (const auto &b : local_blocks)
    b.check_invariants();
  const std::size_t I = lambda.rows();
  const std::size_t D = z.cols();
  if (!(pi >= 0.0 && pi <= 1.0))
    throw numeric_error("pi outside [0, 1]");
  if (!(tau > 0.0))
    throw numeric_error("tau must be positive");
  for (std::size_t i = 0; i < I; ++i) {
    if (lambda_global[i] != global_block.atoms[global_block.allocations[i]])
      throw numeric_error("global strength differs from its atom");
    for (std::size_t d = 0; d < D; ++d) {
      const auto &b = local_blocks[d];
      if (lambda_local(i, d) != b.atoms[b.allocations[i]])
        throw numeric_error("local strength differs from its atom");
      if (z(i, d) > 1)
        throw numeric_error("z is not binary");
    }
    for (std::size_t j = 0; j < lambda.cols(); ++j)
      if (!(lambda(i, j) > 0.0) || !std::isfinite(lambda(i, j)))
        throw numeric_error("realized strength is not positive and finite");
  }
}

const std::vector<double> *PosteriorDraws::trace(std::string_view name) const {
  for (std::size_t k = 0; k < trace_names.size(); ++k)
    if (trace_names[k] == name)
      return &traces[k];
  return nullptr;
}

LocalGlobalSampler::LocalGlobalSampler(const ContingencyTable &table,
                                       ExpectedCounts expected, ModelConfig config)
    : LocalGlobalSampler(table.counts(), std::move(expected), table.reference_column(),
                         std::move(config)) {}

LocalGlobalSampler::LocalGlobalSampler(const Matrix<std::int64_t> &counts,
                                       ExpectedCounts expected, std::size_t reference,
                                       ModelConfig config)
    : config_(std::move(config)), rows_(counts.rows()), cols_(counts.cols()),
      reference_(reference), expected_(std::move(expected)) {
  config_.validate();
  if (rows_ < 1 || cols_ < 2)
    throw validation_error("model needs at least one row and two columns");
  if (reference_ >= cols_)
    throw validation_error("reference column out of range");
  if (!counts.same_shape(Matrix<std::int64_t>(expected_.rows(), expected_.cols())))
    throw validation_error("expected counts do not match the table dimensions");
  for (double e : expected_.data())
    if (!(e > 0.0) || !std::isfinite(e))
      throw validation_error("expected counts must be positive and finite");
  K_ = config_.truncation == 0 ? default_truncation(rows_, cols_) : config_.truncation;
  for (std::size_t j = 0; j < cols_; ++j)
    if (j != reference_)
      drugs_.push_back(j);
  set_counts(counts);
}

void LocalGlobalSampler::set_counts(const Matrix<std::int64_t> &counts) {
  if (counts.rows() != rows_ || counts.cols() != cols_)
    throw validation_error("count matrix does not match the sampler dimensions");
  counts_ = Matrix<double>(rows_, cols_);
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts.data()[k] < 0)
      throw validation_error("negative count");
    counts_.data()[k] = static_cast<double>(counts.data()[k]);
  }
}

DpPriors LocalGlobalSampler::priors() const {
  return {config_.psi_alpha, config_.psi_beta, config_.beta_fixed};
}

KMeans1d kmeans_1d(std::span<const double> points, std::size_t k) {
  KMeans1d out;
  if (points.empty() || k == 0)
    return out;
  std::vector<double> distinct(points.begin(), points.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  k = std::min(k, distinct.size());

  std::vector<double> centers(k);
  for (std::size_t c = 0; c < k; ++c)
    centers[c] = distinct[static_cast<std::size_t>((c + 0.5) * distinct.size() / k)];

  std::vector<std::size_t> labels(points.size(), 0);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = iter == 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::abs(points[i] - centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = std::abs(points[i] - centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(centers.size(), 0.0);
    std::vector<std::size_t> cnt(centers.size(), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sum[labels[i]] += points[i];
      ++cnt[labels[i]];
    }
    std::vector<double> next;
    std::vector<std::size_t> remap(centers.size(), 0);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (cnt[c] > 0) {
        remap[c] = next.size();
        next.push_back(sum[c] / static_cast<double>(cnt[c]));
      }
    }
    if (next.size() != centers.size()) {
      for (auto &l : labels)
        l = remap[l];
      changed = true;
    }
    centers = std::move(next);
    if (!changed)
      break;
  }
  out.centers = std::move(centers);
  out.labels = std::move(labels);
  return out;
}

double gamma_unit_mean_mle(std::span<const double> atoms) {
  constexpr double lo_cap = 1e-3, hi_cap = 1e3;
  if (atoms.empty())
    return 1.0;
  double mean = 0.0, mean_log = 0.0;
  for (double t : atoms) {
    mean += t;
    mean_log += std::log(t);
  }
  mean /= static_cast<double>(atoms.size());
  mean_log /= static_cast<double>(atoms.size());
  // Stationarity: log(b) - digamma(b) = mean - mean_log - 1, decreasing in b.
  const double target = mean - mean_log - 1.0;
  auto g = [](double b) { return std::log(b) - boost::math::digamma(b); };
  if (target >= g(lo_cap))
    return lo_cap;
  if (target <= g(hi_cap))
    return hi_cap;
  double lo = std::log(lo_cap), hi = std::log(hi_cap);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(std::exp(mid)) > target)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

DpBlock LocalGlobalSampler::init_block(std::span<const double> counts,
                                       std::span<const double> exposure,
                                       std::span<const unsigned char> include,
                                       RngStream &rng) const {
  const std::size_t N = counts.size();
  const std::size_t K = K_;
  const double half = std::min(static_cast<double>(K) / 2.0, static_cast<double>(rows_) - 1.0);
  const std::size_t k_plus =
      std::min(K, static_cast<std::size_t>(std::floor(std::max(half, 0.0))) + 1);

  DpBlock b;
  b.alpha = sample_gamma(1.0, 2.0, rng);
  b.atoms.assign(K, 1.0);
  b.weights.assign(K, 0.0);
  b.allocations.assign(N, 0);

  std::vector<std::size_t> idx;
  std::vector<double> points;
  for (std::size_t i = 0; i < N; ++i) {
    if (include[i]) {
      idx.push_back(i);
      points.push_back((counts[i] + 0.5) / (exposure[i] + 0.5));
    }
  }

  std::size_t filled = 0;
  std::vector<std::size_t> cluster_rank;
  KMeans1d km;
  if (!points.empty()) {
    km = kmeans_1d(points, k_plus);
    const std::size_t k = km.centers.size();
    std::vector<std::size_t> freq(k, 0);
    for (auto l : km.labels)
      ++freq[l];
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return freq[a] > freq[c]; });
    cluster_rank.assign(k, 0);
    for (std::size_t r = 0; r < k; ++r) {
      cluster_rank[order[r]] = r;
      b.atoms[r] = km.centers[order[r]];
      b.weights[r] = static_cast<double>(freq[order[r]]) / static_cast<double>(points.size());
    }
    filled = k;
    b.beta = config_.beta_fixed.value_or(
        gamma_unit_mean_mle(std::span<const double>(b.atoms.data(), k)));
  } else {
    b.beta = config_.beta_fixed.value_or(1.0);
  }

  if (filled == 0) {
    for (std::size_t h = 0; h < K; ++h) {
      b.atoms[h] = sample_gamma(b.beta, b.beta, rng);
      b.weights[h] = 1.0 / static_cast<double>(K);
    }
  } else if (filled < K) {
    const double w_min = *std::min_element(b.weights.begin(), b.weights.begin() + filled);
    for (std::size_t h = filled; h < K; ++h) {
      b.atoms[h] = sample_gamma(b.beta, b.beta, rng);
      b.weights[h] = w_min / 10.0;
    }
    const double total = std::accumulate(b.weights.begin(), b.weights.end(), 0.0);
    for (double &w : b.weights)
      w /= total;
  }
  sticks_from_weights(b);

  for (std::size_t i = 0; i < N; ++i)
    if (!include[i])
      b.allocations[i] = sample_categorical(b.weights, rng);
  for (std::size_t p = 0; p < idx.size(); ++p)
    b.allocations[idx[p]] = cluster_rank[km.labels[p]];
  return b;
}

McmcState LocalGlobalSampler::init_state(RngStream &rng) const {
  const std::size_t I = rows_, D = drugs_.size();
  McmcState s;
  s.z = BinaryMatrix(I, D, 0);
  if (config_.pi_fixed) {
    const double p = *config_.pi_fixed;
    for (auto &v : s.z.data())
      v = p >= 1.0 ? 1 : p <= 0.0 ? 0 : static_cast<unsigned char>(sample_bernoulli(p, rng));
    s.pi = p;
  } else {
    for (auto &v : s.z.data())
      v = static_cast<unsigned char>(sample_bernoulli(0.5, rng));
    s.pi = 0.5;
  }
  s.y = BinaryMatrix(I, cols_, 0);
  s.omega.assign(cols_, 0.01);
  s.tau = 1.0;

  std::vector<double> gn(I, 0.0), ge(I, 0.0);
  std::vector<unsigned char> ginc(I, 0);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t d = 0; d < D; ++d) {
      if (!s.z(i, d)) {
        gn[i] += counts_(i, drugs_[d]);
        ge[i] += expected_(i, drugs_[d]);
        ginc[i] = 1;
      }
    }
  }
  s.global_block = init_block(gn, ge, ginc, rng);
  s.lambda_global.resize(I);
  for (std::size_t i = 0; i < I; ++i)
    s.lambda_global[i] = s.global_block.atoms[s.global_block.allocations[i]];

  s.lambda_local = Matrix<double>(I, D);
  std::vector<double> ln(I), le(I);
  std::vector<unsigned char> linc(I);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t i = 0; i < I; ++i) {
      ln[i] = counts_(i, drugs_[d]);
      le[i] = expected_(i, drugs_[d]);
      linc[i] = s.z(i, d);
    }
    s.local_blocks.push_back(init_block(ln, le, linc, rng));
    const auto &b = s.local_blocks.back();
    for (std::size_t i = 0; i < I; ++i)
      s.lambda_local(i, d) = b.atoms[b.allocations[i]];
  }

  s.lambda_ref.resize(I);
  for (std::size_t i = 0; i < I; ++i)
    s.lambda_ref[i] = (counts_(i, reference_) + s.tau) / (expected_(i, reference_) + s.tau);

  s.lambda = Matrix<double>(I, cols_);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t d = 0; d < D; ++d)
      s.lambda(i, drugs_[d]) = s.z(i, d) ? s.lambda_local(i, d) : s.lambda_global[i];
    s.lambda(i, reference_) = s.lambda_ref[i];
  }
  return s;
}

void LocalGlobalSampler::lg_core(McmcState &s, const BinaryMatrix &active,
                                 RngStream &rng) const {
  const std::size_t I = rows_, D = drugs_.size();
  const DpPriors pr = priors();

  // Global block on AE-aggregated globally-assigned cells.
  std::vector<double> gn(I, 0.0), ge(I, 0.0);
  std::vector<unsigned char> ginc(I, 0);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto j = drugs_[d];
      if (!s.z(i, d) && active(i, j)) {
        gn[i] += counts_(i, j);
        ge[i] += expected_(i, j);
        ginc[i] = 1;
      }
    }
  }
  s.lambda_global = dpsb_update(s.global_block, {gn, ge, ginc}, pr, config_.slice, rng);

  // Local blocks.
  std::vector<double> ln(I), le(I);
  std::vector<unsigned char> linc(I);
  for (std::size_t d = 0; d < D; ++d) {
    const auto j = drugs_[d];
    for (std::size_t i = 0; i < I; ++i) {
      ln[i] = counts_(i, j);
      le[i] = expected_(i, j);
      linc[i] = s.z(i, d) && active(i, j);
    }
    const auto lam = dpsb_update(s.local_blocks[d], {ln, le, linc}, pr, config_.slice, rng);
    for (std::size_t i = 0; i < I; ++i)
      s.lambda_local(i, d) = lam[i];
  }

  // Indicators for cells that carry likelihood.
  const double pi_now = config_.pi_fixed.value_or(s.pi);
  const double log_pi = std::log(pi_now);
  const double log_1mpi = std::log1p(-pi_now);
  double n_local = 0.0, n_global = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto j = drugs_[d];
      if (!active(i, j))
        continue;
      const double n = counts_(i, j), e = expected_(i, j);
      const double ll = s.lambda_local(i, d), lg = s.lambda_global[i];
      const double a = log_pi + n * std::log(ll) - ll * e;
      const double b = log_1mpi + n * std::log(lg) - lg * e;
      const bool local = sample_bernoulli(bernoulli_log_odds_prob(a, b), rng);
      s.z(i, d) = local;
      (local ? n_local : n_global) += 1.0;
    }
  }

  if (config_.pi_fixed)
    s.pi = *config_.pi_fixed;
  else
    s.pi = sample_beta(config_.a_pi + n_local, config_.b_pi + n_global, rng);

  // Structural-zero cells: z from its prior given the new pi.
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t d = 0; d < D; ++d)
      if (!active(i, drugs_[d]))
        s.z(i, d) = sample_bernoulli(s.pi, rng);

  // Reference column and its shrinkage.
  double sum_log = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const bool on = active(i, reference_);
    const double n = on ? counts_(i, reference_) : 0.0;
    const double e = on ? expected_(i, reference_) : 0.0;
    s.lambda_ref[i] = sample_gamma(n + s.tau, e + s.tau, rng);
    sum_log += std::log(s.lambda_ref[i]);
    sum += s.lambda_ref[i];
  }
  SliceConfig tau_slice = config_.slice;
  tau_slice.lower_bound = std::max(tau_slice.lower_bound, kTauFloor);
  s.tau = slice_sample_step(
      [&](double t) { return log_gamma_shape_target(t, I, sum_log, sum, config_.psi_tau); },
      std::max(s.tau, 2.0 * kTauFloor), tau_slice, rng);

  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t d = 0; d < D; ++d)
      s.lambda(i, drugs_[d]) = s.z(i, d) ? s.lambda_local(i, d) : s.lambda_global[i];
    s.lambda(i, reference_) = s.lambda_ref[i];
  }
}

void LocalGlobalSampler::poisson_iteration(McmcState &state, RngStream &rng) const {
  const BinaryMatrix all(rows_, cols_, 1);
  lg_core(state, all, rng);
}

void LocalGlobalSampler::zip_iteration(McmcState &s, RngStream &rng) const {
  BinaryMatrix active(rows_, cols_, 1);
  for (std::size_t j = 0; j < cols_; ++j) {
    const double w = s.omega[j];
    double zeros = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      unsigned char y = 0;
      if (counts_(i, j) == 0.0 && w > 0.0) {
        const double keep = (1.0 - w) * std::exp(-s.lambda(i, j) * expected_(i, j));
        y = sample_bernoulli(w / (w + keep), rng);
      }
      s.y(i, j) = y;
      active(i, j) = !y;
      zeros += y;
    }
    s.omega[j] = sample_beta(1.0 + zeros, 1.0 + static_cast<double>(rows_) - zeros, rng);
  }
  lg_core(s, active, rng);
}

void LocalGlobalSampler::iterate(McmcState &state, RngStream &rng) const {
  if (config_.likelihood == Likelihood::zip)
    zip_iteration(state, rng);
  else
    poisson_iteration(state, rng);
}

PosteriorDraws LocalGlobalSampler::run(
    RngStream &rng, const std::function<void(const McmcState &)> &observer) const {
  McmcState s = init_state(rng);
  const std::size_t D = drugs_.size();
  const bool zip = config_.likelihood == Likelihood::zip;

  PosteriorDraws out;
  out.rows = rows_;
  out.cols = cols_;
  out.lambda.reserve(config_.n_keep * rows_ * cols_);
  out.trace_names = {"pi", "tau", "alpha_global", "beta_global"};
  for (std::size_t d = 0; d < D; ++d) {
    out.trace_names.push_back("alpha_local[" + std::to_string(drugs_[d]) + "]");
    out.trace_names.push_back("beta_local[" + std::to_string(drugs_[d]) + "]");
  }
  if (zip)
    for (std::size_t j = 0; j < cols_; ++j)
      out.trace_names.push_back("omega[" + std::to_string(j) + "]");
  out.trace_names.push_back("occupied_global");
  out.traces.assign(out.trace_names.size(), {});
  for (auto &t : out.traces)
    t.reserve(config_.n_keep);

  const std::uint64_t slices_per_iter = 1 + (config_.beta_fixed ? 0 : D + 1);
  auto step = [&] {
    iterate(s, rng);
    ++out.iterations;
    out.slice_updates += slices_per_iter;
  };

  for (std::size_t it = 0; it < config_.n_burn; ++it)
    step();
  for (std::size_t k = 0; k < config_.n_keep; ++k) {
    for (std::size_t t = 0; t < config_.thin; ++t)
      step();
    out.lambda.insert(out.lambda.end(), s.lambda.data().begin(), s.lambda.data().end());
    std::size_t c = 0;
    out.traces[c++].push_back(s.pi);
    out.traces[c++].push_back(s.tau);
    out.traces[c++].push_back(s.global_block.alpha);
    out.traces[c++].push_back(s.global_block.beta);
    for (std::size_t d = 0; d < D; ++d) {
      out.traces[c++].push_back(s.local_blocks[d].alpha);
      out.traces[c++].push_back(s.local_blocks[d].beta);
    }
    if (zip)
      for (std::size_t j = 0; j < cols_; ++j)
        out.traces[c++].push_back(s.omega[j]);
    out.traces[c++].push_back(static_cast<double>(s.global_block.occupied()));
    if (observer)
      observer(s);
  }
  return out;
}

McmcState init_state(const ContingencyTable &table, const ExpectedCounts &expected,
                     const ModelConfig &config, RngStream &rng) {
  return LocalGlobalSampler(table, expected, config).init_state(rng);
}

void poisson_lg_iteration(McmcState &state, const ContingencyTable &table,
                          const ExpectedCounts &expected, const ModelConfig &config,
                          RngStream &rng) {
  LocalGlobalSampler(table, expected, config).poisson_iteration(state, rng);
}

void zip_iteration(McmcState &state, const ContingencyTable &table,
                   const ExpectedCounts &expected, const ModelConfig &config,
                   RngStream &rng) {
  LocalGlobalSampler(table, expected, config).zip_iteration(state, rng);
}

PosteriorDraws run_chain(const ContingencyTable &table, const ModelConfig &config,
                         RngStream &rng) {
  return LocalGlobalSampler(table, expected_counts(table), config).run(rng);
}

} // namespace dpsignal
