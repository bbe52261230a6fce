/* dpsignal C API.
 *
 * Every function returning dps_status reports failure through the status and
 * a thread-local message readable with dps_last_error(). Objects are opaque
 * handles released with their matching *_free function; passing NULL to a
 * free function is a no-op. Matrices are exchanged as caller-allocated
 * row-major buffers of rows * cols elements.
 */
#ifndef DPSIGNAL_H
#define DPSIGNAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPS_API __declspec(dllexport)
#else
#define DPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dps_status {
  DPS_OK = 0,
  DPS_ERR_USAGE = 2,
  DPS_ERR_VALIDATION = 3,
  DPS_ERR_IO = 4,
  DPS_ERR_NUMERIC = 5,
  DPS_ERR_INTERNAL = 6
} dps_status;

DPS_API const char *dps_last_error(void);
DPS_API const char *dps_version(void);
/* Releases strings returned through char** out-parameters. */
DPS_API void dps_string_free(char *s);

/* ---- tables ---- */

typedef struct dps_table dps_table;

DPS_API dps_status dps_table_read_csv(const char *path, dps_table **out);
DPS_API dps_status dps_table_parse_csv(const char *text, size_t len, dps_table **out);
DPS_API dps_status dps_table_create(size_t rows, size_t cols, const int64_t *counts,
                                    const char *const *ae_names, const char *const *drug_names,
                                    size_t reference_column, dps_table **out);
DPS_API void dps_table_free(dps_table *t);

DPS_API size_t dps_table_rows(const dps_table *t);
DPS_API size_t dps_table_cols(const dps_table *t);
DPS_API size_t dps_table_reference_column(const dps_table *t);
DPS_API dps_status dps_table_set_reference_column(dps_table *t, size_t column);
DPS_API const char *dps_table_ae_name(const dps_table *t, size_t i);
DPS_API const char *dps_table_drug_name(const dps_table *t, size_t j);
DPS_API dps_status dps_table_counts(const dps_table *t, int64_t *out);
DPS_API dps_status dps_table_expected(const dps_table *t, double *out);
DPS_API dps_status dps_table_to_csv(const dps_table *t, char **out);
/* Per-cell matrix as CSV with the table's labels. integer != 0 prints
 * values rounded to integers. */
DPS_API dps_status dps_table_matrix_csv(const dps_table *t, const double *values, int integer,
                                        char **out);

/* ---- model ---- */

typedef enum dps_likelihood { DPS_POISSON = 0, DPS_ZIP = 1 } dps_likelihood;

typedef struct dps_model_config {
  dps_likelihood likelihood;
  size_t truncation; /* 0 = automatic */
  double psi_alpha;
  double psi_beta;
  double psi_tau;
  int has_pi_fixed;
  double pi_fixed;
  double a_pi;
  double b_pi;
  double slice_width;
  int slice_max_steps;
  size_t n_burn;
  size_t n_keep;
  size_t thin;
} dps_model_config;

DPS_API void dps_model_config_default(dps_model_config *cfg);
DPS_API size_t dps_default_truncation(size_t rows, size_t cols);

typedef struct dps_draws dps_draws;

DPS_API dps_status dps_fit(const dps_table *t, const dps_model_config *cfg, uint64_t seed,
                           uint64_t stream, dps_draws **out);
DPS_API void dps_draws_free(dps_draws *d);
DPS_API size_t dps_draws_count(const dps_draws *d);
DPS_API size_t dps_draws_rows(const dps_draws *d);
DPS_API size_t dps_draws_cols(const dps_draws *d);
DPS_API dps_status dps_draws_lambda(const dps_draws *d, size_t draw, double *out);
DPS_API size_t dps_draws_trace_count(const dps_draws *d);
DPS_API const char *dps_draws_trace_name(const dps_draws *d, size_t k);
/* Copies up to cap values; *len receives the trace length. */
DPS_API dps_status dps_draws_trace(const dps_draws *d, const char *name, double *out,
                                   size_t cap, size_t *len);
DPS_API dps_status dps_draws_quantile(const dps_draws *d, double p, double *out);
DPS_API dps_status dps_draws_mean(const dps_draws *d, double *out);
DPS_API dps_status dps_draws_null_probability(const dps_draws *d, double *out);
DPS_API dps_status dps_draws_save(const dps_draws *d, const char *path);
DPS_API dps_status dps_draws_load(const char *path, dps_draws **out);

/* ---- detection ---- */

typedef struct dps_detection dps_detection;

/* NULL grids select the defaults. With a table, only cells with n_ij > 1 may
 * be flagged; with t == NULL every cell is eligible. */
DPS_API dps_status dps_detect(const dps_draws *d, const dps_table *t, double alpha,
                              const double *p_grid, size_t n_p, const double *k_grid,
                              size_t n_k, dps_detection **out);
/* Local-only DP: pi fixed at 1, p = 0.05, every cell eligible. */
DPS_API dps_status dps_hu_detect(const dps_table *t, const dps_model_config *cfg, double alpha,
                                 const double *k_grid, size_t n_k, uint64_t seed,
                                 uint64_t stream, dps_detection **out);
DPS_API void dps_detection_free(dps_detection *r);
DPS_API size_t dps_detection_rows(const dps_detection *r);
DPS_API size_t dps_detection_cols(const dps_detection *r);
DPS_API double dps_detection_p_hat(const dps_detection *r);
DPS_API double dps_detection_k_hat(const dps_detection *r);
DPS_API double dps_detection_fdr_hat(const dps_detection *r);
DPS_API double dps_detection_fnr_hat(const dps_detection *r);
DPS_API int dps_detection_feasible(const dps_detection *r);
DPS_API dps_status dps_detection_signals(const dps_detection *r, unsigned char *out);
DPS_API dps_status dps_detection_q(const dps_detection *r, double *out);

DPS_API size_t dps_default_p_grid(double *out, size_t cap);
DPS_API size_t dps_default_k_grid(double *out, size_t cap);
DPS_API dps_status dps_bh_adjust(const double *probs, size_t n, double *out);

/* ---- baselines ---- */

/* Signal matrix plus named per-cell matrices and named scalars. */
typedef struct dps_baseline dps_baseline;

DPS_API dps_status dps_bcpnn(const dps_table *t, double alpha, size_t n_mc, uint64_t seed,
                             uint64_t stream, dps_baseline **out);
DPS_API dps_status dps_gps(const dps_table *t, double alpha, dps_baseline **out);
DPS_API dps_status dps_lrt(const dps_table *t, double alpha, size_t n_boot, uint64_t seed,
                           uint64_t stream, unsigned threads, dps_baseline **out);
DPS_API void dps_baseline_free(dps_baseline *b);
DPS_API size_t dps_baseline_rows(const dps_baseline *b);
DPS_API size_t dps_baseline_cols(const dps_baseline *b);
DPS_API dps_status dps_baseline_signals(const dps_baseline *b, unsigned char *out);
DPS_API size_t dps_baseline_matrix_count(const dps_baseline *b);
DPS_API const char *dps_baseline_matrix_name(const dps_baseline *b, size_t k);
DPS_API dps_status dps_baseline_matrix(const dps_baseline *b, const char *name, double *out);
DPS_API size_t dps_baseline_scalar_count(const dps_baseline *b);
DPS_API const char *dps_baseline_scalar_name(const dps_baseline *b, size_t k);
DPS_API dps_status dps_baseline_scalar(const dps_baseline *b, const char *name, double *out);

/* ---- simulation ---- */

typedef struct dps_study dps_study;

/* Study configuration as flat key=value text. */
DPS_API dps_status dps_study_create(const char *config_text, dps_study **out);
DPS_API dps_status dps_study_set(dps_study *s, const char *key, const char *value);
DPS_API dps_status dps_study_config_text(const dps_study *s, char **out);
DPS_API dps_status dps_study_run(dps_study *s, const dps_table *reference);
DPS_API dps_status dps_study_summary_csv(const dps_study *s, char **out);
DPS_API dps_status dps_study_replicates_csv(const dps_study *s, char **out);
DPS_API void dps_study_free(dps_study *s);

DPS_API dps_status dps_kendall_tau(const double *x, const double *y, size_t n, double *out);

#ifdef __cplusplus
}
#endif

#endif
