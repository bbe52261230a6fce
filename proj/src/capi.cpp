#include "dpsignal/dpsignal.h"

#include "dpsignal/archive.hpp"
#include "dpsignal/baselines.hpp"
#include "dpsignal/detection.hpp"
#include "dpsignal/dp_mcmc.hpp"
#include "dpsignal/error.hpp"
#include "dpsignal/simulation.hpp"
#include "dpsignal/table.hpp"

#include <cstring>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#ifndef DPSIGNAL_VERSION
#define DPSIGNAL_VERSION "0.0.0"
#endif

using namespace dpsignal;

struct dps_table {
  ContingencyTable table;
};

struct dps_draws {
  PosteriorDraws draws;
};

struct dps_detection {
  DetectionResult result;
};

struct dps_baseline {
  BinaryMatrix signals;
  std::vector<std::pair<std::string, Matrix<double>>> matrices;
  std::vector<std::pair<std::string, double>> scalars;
};

struct dps_study {
  std::string text;
  std::optional<StudyResult> result;
};

namespace {

thread_local std::string g_last_error;

dps_status fail(dps_status s, const std::string &msg) {
  g_last_error = msg;
  return s;
}

template <class F> dps_status guard(F &&f) {
  try {
    f();
    g_last_error.clear();
    return DPS_OK;
  } catch (const Error &e) {
    return fail(static_cast<dps_status>(e.kind()), e.what());
  } catch (const std::bad_alloc &) {
    return fail(DPS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(DPS_ERR_INTERNAL, e.what());
  }
}

void require(const void *p, const char *what) {
  if (!p)
    throw usage_error(std::string(what) + " must not be NULL");
}

char *dup_string(const std::string &s) {
  auto *p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <class T> void copy_out(const Matrix<T> &m, T *out) {
  std::copy(m.data().begin(), m.data().end(), out);
}

ModelConfig to_model_config(const dps_model_config *c) {
  ModelConfig m;
  if (!c)
    return m;
  if (c->likelihood != DPS_POISSON && c->likelihood != DPS_ZIP)
    throw usage_error("unknown likelihood");
  m.likelihood = c->likelihood == DPS_ZIP ? Likelihood::zip : Likelihood::poisson;
  m.truncation = c->truncation;
  m.psi_alpha = c->psi_alpha;
  m.psi_beta = c->psi_beta;
  m.psi_tau = c->psi_tau;
  if (c->has_pi_fixed)
    m.pi_fixed = c->pi_fixed;
  m.a_pi = c->a_pi;
  m.b_pi = c->b_pi;
  m.slice.initial_width = c->slice_width;
  m.slice.max_stepping_out = c->slice_max_steps;
  m.n_burn = c->n_burn;
  m.n_keep = c->n_keep;
  m.thin = c->thin;
  return m;
}

std::vector<double> grid_or(const double *g, std::size_t n, std::vector<double> fallback) {
  if (!g || n == 0)
    return fallback;
  return {g, g + n};
}

} // namespace

extern "C" {

const char *dps_last_error(void) { return g_last_error.c_str(); }
const char *dps_version(void) { return DPSIGNAL_VERSION; }
void dps_string_free(char *s) { delete[] s; }

// ---- tables ----

dps_status dps_table_read_csv(const char *path, dps_table **out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new dps_table{read_table_csv(path)};
  });
}

dps_status dps_table_parse_csv(const char *text, size_t len, dps_table **out) {
  return guard([&] {
    require(text, "text");
    require(out, "out");
    *out = new dps_table{parse_table_csv(std::string_view(text, len))};
  });
}

dps_status dps_table_create(size_t rows, size_t cols, const int64_t *counts,
                            const char *const *ae_names, const char *const *drug_names,
                            size_t reference_column, dps_table **out) {
  return guard([&] {
    require(counts, "counts");
    require(ae_names, "ae_names");
    require(drug_names, "drug_names");
    require(out, "out");
    Matrix<std::int64_t> m(rows, cols);
    std::copy(counts, counts + rows * cols, m.data().begin());
    std::vector<std::string> aes, drugs;
    for (size_t i = 0; i < rows; ++i)
      aes.emplace_back(ae_names[i] ? ae_names[i] : "");
    for (size_t j = 0; j < cols; ++j)
      drugs.emplace_back(drug_names[j] ? drug_names[j] : "");
    *out = new dps_table{
        ContingencyTable(std::move(m), std::move(aes), std::move(drugs), reference_column)};
  });
}

void dps_table_free(dps_table *t) { delete t; }
size_t dps_table_rows(const dps_table *t) { return t ? t->table.rows() : 0; }
size_t dps_table_cols(const dps_table *t) { return t ? t->table.cols() : 0; }
size_t dps_table_reference_column(const dps_table *t) {
  return t ? t->table.reference_column() : 0;
}

dps_status dps_table_set_reference_column(dps_table *t, size_t column) {
  return guard([&] {
    require(t, "table");
    t->table = t->table.with_reference_column(column);
  });
}

const char *dps_table_ae_name(const dps_table *t, size_t i) {
  return t && i < t->table.rows() ? t->table.ae_names()[i].c_str() : nullptr;
}

const char *dps_table_drug_name(const dps_table *t, size_t j) {
  return t && j < t->table.cols() ? t->table.drug_names()[j].c_str() : nullptr;
}

dps_status dps_table_counts(const dps_table *t, int64_t *out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    copy_out(t->table.counts(), out);
  });
}

dps_status dps_table_expected(const dps_table *t, double *out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    copy_out(expected_counts(t->table), out);
  });
}

dps_status dps_table_to_csv(const dps_table *t, char **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    *out = dup_string(to_csv(t->table));
  });
}

dps_status dps_table_matrix_csv(const dps_table *t, const double *values, int integer,
                                char **out) {
  return guard([&] {
    require(t, "table");
    require(values, "values");
    require(out, "out");
    std::ostringstream s;
    if (integer) {
      Matrix<std::int64_t> m(t->table.rows(), t->table.cols());
      for (size_t c = 0; c < m.size(); ++c)
        m.data()[c] = std::llround(values[c]);
      write_cell_matrix_csv(s, t->table, m);
    } else {
      Matrix<double> m(t->table.rows(), t->table.cols());
      std::copy(values, values + m.size(), m.data().begin());
      write_cell_matrix_csv(s, t->table, m);
    }
    *out = dup_string(s.str());
  });
}

// ---- model ----

void dps_model_config_default(dps_model_config *cfg) {
  if (!cfg)
    return;
  const ModelConfig m;
  cfg->likelihood = DPS_POISSON;
  cfg->truncation = m.truncation;
  cfg->psi_alpha = m.psi_alpha;
  cfg->psi_beta = m.psi_beta;
  cfg->psi_tau = m.psi_tau;
  cfg->has_pi_fixed = 0;
  cfg->pi_fixed = 1.0;
  cfg->a_pi = m.a_pi;
  cfg->b_pi = m.b_pi;
  cfg->slice_width = m.slice.initial_width;
  cfg->slice_max_steps = m.slice.max_stepping_out;
  cfg->n_burn = m.n_burn;
  cfg->n_keep = m.n_keep;
  cfg->thin = m.thin;
}

size_t dps_default_truncation(size_t rows, size_t cols) {
  return default_truncation(rows, cols);
}

dps_status dps_fit(const dps_table *t, const dps_model_config *cfg, uint64_t seed,
                   uint64_t stream, dps_draws **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    RngStream rng(seed, stream);
    *out = new dps_draws{run_chain(t->table, to_model_config(cfg), rng)};
  });
}

void dps_draws_free(dps_draws *d) { delete d; }
size_t dps_draws_count(const dps_draws *d) { return d ? d->draws.n_draws() : 0; }
size_t dps_draws_rows(const dps_draws *d) { return d ? d->draws.rows : 0; }
size_t dps_draws_cols(const dps_draws *d) { return d ? d->draws.cols : 0; }

dps_status dps_draws_lambda(const dps_draws *d, size_t draw, double *out) {
  return guard([&] {
    require(d, "draws");
    require(out, "out");
    if (draw >= d->draws.n_draws())
      throw usage_error("draw index out of range");
    const auto v = d->draws.draw(draw);
    std::copy(v.begin(), v.end(), out);
  });
}

size_t dps_draws_trace_count(const dps_draws *d) { return d ? d->draws.trace_names.size() : 0; }

const char *dps_draws_trace_name(const dps_draws *d, size_t k) {
  return d && k < d->draws.trace_names.size() ? d->draws.trace_names[k].c_str() : nullptr;
}

dps_status dps_draws_trace(const dps_draws *d, const char *name, double *out, size_t cap,
                           size_t *len) {
  return guard([&] {
    require(d, "draws");
    require(name, "name");
    const auto *tr = d->draws.trace(name);
    if (!tr)
      throw usage_error(std::string("no trace named '") + name + "'");
    if (len)
      *len = tr->size();
    if (out)
      std::copy(tr->begin(), tr->begin() + static_cast<std::ptrdiff_t>(std::min(cap, tr->size())),
                out);
  });
}

dps_status dps_draws_quantile(const dps_draws *d, double p, double *out) {
  return guard([&] {
    require(d, "draws");
    require(out, "out");
    copy_out(posterior_quantile_matrix(d->draws, p), out);
  });
}

dps_status dps_draws_mean(const dps_draws *d, double *out) {
  return guard([&] {
    require(d, "draws");
    require(out, "out");
    copy_out(posterior_mean_matrix(d->draws), out);
  });
}

dps_status dps_draws_null_probability(const dps_draws *d, double *out) {
  return guard([&] {
    require(d, "draws");
    require(out, "out");
    copy_out(null_probability_matrix(d->draws), out);
  });
}

dps_status dps_draws_save(const dps_draws *d, const char *path) {
  return guard([&] {
    require(d, "draws");
    require(path, "path");
    save_draws(path, d->draws);
  });
}

dps_status dps_draws_load(const char *path, dps_draws **out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new dps_draws{load_draws(path)};
  });
}

// ---- detection ----

dps_status dps_detect(const dps_draws *d, const dps_table *t, double alpha,
                      const double *p_grid, size_t n_p, const double *k_grid, size_t n_k,
                      dps_detection **out) {
  return guard([&] {
    require(d, "draws");
    require(out, "out");
    const auto pg = grid_or(p_grid, n_p, default_p_grid());
    const auto kg = grid_or(k_grid, n_k, default_k_grid());
    DetectionResult r = t ? grid_search_detect(d->draws, t->table, alpha, pg, kg)
                          : grid_search_detect(d->draws, BinaryMatrix{}, alpha, pg, kg);
    *out = new dps_detection{std::move(r)};
  });
}

dps_status dps_hu_detect(const dps_table *t, const dps_model_config *cfg, double alpha,
                         const double *k_grid, size_t n_k, uint64_t seed, uint64_t stream,
                         dps_detection **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    RngStream rng(seed, stream);
    const auto kg = grid_or(k_grid, n_k, default_k_grid());
    *out = new dps_detection{dp_hu_detect(t->table, to_model_config(cfg), alpha, rng, kg)};
  });
}

void dps_detection_free(dps_detection *r) { delete r; }
size_t dps_detection_rows(const dps_detection *r) { return r ? r->result.q.rows() : 0; }
size_t dps_detection_cols(const dps_detection *r) { return r ? r->result.q.cols() : 0; }
double dps_detection_p_hat(const dps_detection *r) { return r ? r->result.p_hat : 0.0; }
double dps_detection_k_hat(const dps_detection *r) { return r ? r->result.k_hat : 0.0; }
double dps_detection_fdr_hat(const dps_detection *r) { return r ? r->result.fdr_hat : 0.0; }
double dps_detection_fnr_hat(const dps_detection *r) { return r ? r->result.fnr_hat : 0.0; }
int dps_detection_feasible(const dps_detection *r) { return r && r->result.feasible ? 1 : 0; }

dps_status dps_detection_signals(const dps_detection *r, unsigned char *out) {
  return guard([&] {
    require(r, "detection");
    require(out, "out");
    copy_out(r->result.signals, out);
  });
}

dps_status dps_detection_q(const dps_detection *r, double *out) {
  return guard([&] {
    require(r, "detection");
    require(out, "out");
    copy_out(r->result.q, out);
  });
}

size_t dps_default_p_grid(double *out, size_t cap) {
  const auto g = default_p_grid();
  if (out)
    std::copy(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(std::min(cap, g.size())), out);
  return g.size();
}

size_t dps_default_k_grid(double *out, size_t cap) {
  const auto g = default_k_grid();
  if (out)
    std::copy(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(std::min(cap, g.size())), out);
  return g.size();
}

dps_status dps_bh_adjust(const double *probs, size_t n, double *out) {
  return guard([&] {
    if (n == 0)
      return;
    require(probs, "probs");
    require(out, "out");
    const auto v = bh_adjust(std::span<const double>(probs, n));
    std::copy(v.begin(), v.end(), out);
  });
}

// ---- baselines ----

dps_status dps_bcpnn(const dps_table *t, double alpha, size_t n_mc, uint64_t seed,
                     uint64_t stream, dps_baseline **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    RngStream rng(seed, stream);
    auto r = bcpnn_detect(t->table, alpha, n_mc, rng);
    *out = new dps_baseline{std::move(r.signals),
                            {{"ic_mean", std::move(r.ic_mean)},
                             {"ic_lower", std::move(r.ic_lower)},
                             {"null_prob", std::move(r.null_prob)},
                             {"adjusted", std::move(r.adjusted)}},
                            {}};
  });
}

dps_status dps_gps(const dps_table *t, double alpha, dps_baseline **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    const auto fit = gps_fit(t->table);
    auto r = gps_detect(t->table, fit.hyper, alpha);
    *out = new dps_baseline{std::move(r.signals),
                            {{"eb05", std::move(r.eb05)},
                             {"posterior_mean", std::move(r.posterior_mean)},
                             {"weight", std::move(r.weight)},
                             {"null_prob", std::move(r.null_prob)},
                             {"adjusted", std::move(r.adjusted)}},
                            {{"kappa", fit.hyper.kappa},
                             {"alpha1", fit.hyper.alpha1},
                             {"beta1", fit.hyper.beta1},
                             {"alpha2", fit.hyper.alpha2},
                             {"beta2", fit.hyper.beta2},
                             {"log_likelihood", fit.log_likelihood}}};
  });
}

dps_status dps_lrt(const dps_table *t, double alpha, size_t n_boot, uint64_t seed,
                   uint64_t stream, unsigned threads, dps_baseline **out) {
  return guard([&] {
    require(t, "table");
    require(out, "out");
    const RngStream rng(seed, stream);
    auto r = pseudo_lrt_detect(t->table, alpha, n_boot, rng, threads);
    std::vector<std::pair<std::string, double>> scalars{{"log_mlr", r.log_mlr},
                                                        {"global_p_value", r.global_p_value}};
    for (size_t j = 0; j < r.omega_hat.size(); ++j)
      scalars.emplace_back("omega_hat[" + std::to_string(j) + "]", r.omega_hat[j]);
    *out = new dps_baseline{std::move(r.signals),
                            {{"log_lr", std::move(r.log_lr)}, {"p_value", std::move(r.p_values)}},
                            std::move(scalars)};
  });
}

void dps_baseline_free(dps_baseline *b) { delete b; }
size_t dps_baseline_rows(const dps_baseline *b) { return b ? b->signals.rows() : 0; }
size_t dps_baseline_cols(const dps_baseline *b) { return b ? b->signals.cols() : 0; }

dps_status dps_baseline_signals(const dps_baseline *b, unsigned char *out) {
  return guard([&] {
    require(b, "baseline");
    require(out, "out");
    copy_out(b->signals, out);
  });
}

size_t dps_baseline_matrix_count(const dps_baseline *b) { return b ? b->matrices.size() : 0; }

const char *dps_baseline_matrix_name(const dps_baseline *b, size_t k) {
  return b && k < b->matrices.size() ? b->matrices[k].first.c_str() : nullptr;
}

dps_status dps_baseline_matrix(const dps_baseline *b, const char *name, double *out) {
  return guard([&] {
    require(b, "baseline");
    require(name, "name");
    require(out, "out");
    for (const auto &[n, m] : b->matrices)
      if (n == name)
        return copy_out(m, out);
    throw usage_error(std::string("no matrix named '") + name + "'");
  });
}

size_t dps_baseline_scalar_count(const dps_baseline *b) { return b ? b->scalars.size() : 0; }

const char *dps_baseline_scalar_name(const dps_baseline *b, size_t k) {
  return b && k < b->scalars.size() ? b->scalars[k].first.c_str() : nullptr;
}

dps_status dps_baseline_scalar(const dps_baseline *b, const char *name, double *out) {
  return guard([&] {
    require(b, "baseline");
    require(name, "name");
    require(out, "out");
    for (const auto &[n, v] : b->scalars)
      if (n == name) {
        *out = v;
        return;
      }
    throw usage_error(std::string("no scalar named '") + name + "'");
  });
}

// ---- simulation ----

dps_status dps_study_create(const char *config_text, dps_study **out) {
  return guard([&] {
    require(out, "out");
    std::string text = config_text ? config_text : "";
    parse_study_config(text).validate();
    *out = new dps_study{std::move(text), std::nullopt};
  });
}

dps_status dps_study_set(dps_study *s, const char *key, const char *value) {
  return guard([&] {
    require(s, "study");
    require(key, "key");
    require(value, "value");
    std::string next = s->text;
    if (!next.empty() && next.back() != '\n')
      next += '\n';
    next += std::string(key) + "=" + value + "\n";
    parse_study_config(next).validate();
    s->text = std::move(next);
    s->result.reset();
  });
}

dps_status dps_study_config_text(const dps_study *s, char **out) {
  return guard([&] {
    require(s, "study");
    require(out, "out");
    *out = dup_string(to_text(parse_study_config(s->text)));
  });
}

dps_status dps_study_run(dps_study *s, const dps_table *reference) {
  return guard([&] {
    require(s, "study");
    require(reference, "reference");
    s->result = run_study(parse_study_config(s->text), reference->table);
  });
}

dps_status dps_study_summary_csv(const dps_study *s, char **out) {
  return guard([&] {
    require(s, "study");
    require(out, "out");
    if (!s->result)
      throw usage_error("study has not been run");
    std::ostringstream o;
    write_summary_csv(o, *s->result);
    *out = dup_string(o.str());
  });
}

dps_status dps_study_replicates_csv(const dps_study *s, char **out) {
  return guard([&] {
    require(s, "study");
    require(out, "out");
    if (!s->result)
      throw usage_error("study has not been run");
    std::ostringstream o;
    write_replicates_csv(o, *s->result);
    *out = dup_string(o.str());
  });
}

void dps_study_free(dps_study *s) { delete s; }

dps_status dps_kendall_tau(const double *x, const double *y, size_t n, double *out) {
  return guard([&] {
    require(x, "x");
    require(y, "y");
    require(out, "out");
    *out = kendall_tau(std::span<const double>(x, n), std::span<const double>(y, n));
  });
}

} // extern "C"
