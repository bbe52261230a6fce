#pragma once

#include "dpsignal/dp_mcmc.hpp"
#include "dpsignal/matrix.hpp"
#include "dpsignal/stochastic.hpp"
#include "dpsignal/table.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpsignal {

struct SimulationScenario {
  std::string id;
  std::size_t n_fixed_rows = 0;
  std::size_t n_random_per_col = 0;
  double zi_rate = 0.0;
  double signal_strength = 2.0;
  // Keep the last AE row (the collapsed "other AEs" row) free of signals and
  // structural zeros.
  bool protect_last_row = true;

  void validate() const;
};

// Presets 0a..3b; signal_strength is left at its default.
std::optional<SimulationScenario> scenario_preset(std::string_view id);

struct TruthMatrix {
  Matrix<double> lambda0;
  BinaryMatrix signal_mask;
  BinaryMatrix zero_mask;
  std::size_t reference_column = 0;

  std::vector<std::size_t> drug_columns() const;
};

TruthMatrix build_lambda0(const SimulationScenario &scenario, std::size_t rows,
                          std::size_t cols, std::size_t reference_column, RngStream &rng);

// Dirichlet-multinomial table with the reference table's margins as
// concentrations; generated 1s at true-signal cells are collapsed to 0.
ContingencyTable generate_table(const TruthMatrix &truth, const ContingencyTable &reference,
                                RngStream &rng);
// Same, without validation or collapsing (grand total exact).
Matrix<std::int64_t> generate_counts(const TruthMatrix &truth, const ContingencyTable &reference,
                                     RngStream &rng);

// Tau-b, O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);
// Mean tau-b over all pairs of drug columns of lambda0.
double average_kendall_tau(const TruthMatrix &truth);

struct EvaluationMetrics {
  double fdr = 0.0;
  double sensitivity = 0.0;
  double type1 = 0.0;
  double f_score = 0.0;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

ConfusionCounts confusion(const BinaryMatrix &signals, const TruthMatrix &truth);
EvaluationMetrics evaluate_detection(const BinaryMatrix &signals, const TruthMatrix &truth);

enum class Method { lg_poisson, lg_zip, dp_hu, bcpnn, gps, lrt };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct StudyConfig {
  SimulationScenario scenario;
  std::vector<double> lambda_signals{2.0};
  std::size_t replicates = 1;
  std::vector<Method> methods{Method::lg_poisson, Method::dp_hu};
  std::uint64_t seed = 1;
  ModelConfig mcmc{};
  double alpha = 0.05;
  std::size_t n_mc = 100000;
  std::size_t n_boot = 1000;
  unsigned threads = 1;
  std::vector<double> p_grid;
  std::vector<double> k_grid;

  void validate() const;
};

// Flat key=value text; '#' starts a comment.
StudyConfig parse_study_config(std::string_view text);
std::string to_text(const StudyConfig &config);

struct ReplicateRecord {
  std::size_t replicate = 0;
  double lambda_signal = 0.0;
  Method method = Method::lg_poisson;
  bool ok = true;
  std::string error;
  ConfusionCounts counts;
  EvaluationMetrics metrics;
};

struct MethodSummary {
  Method method = Method::lg_poisson;
  double lambda_signal = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  EvaluationMetrics mean;
  EvaluationMetrics se;
};

struct StudyResult {
  std::vector<MethodSummary> summaries;
  std::vector<ReplicateRecord> replicates;
};

StudyResult run_study(const StudyConfig &config, const ContingencyTable &reference);

void write_summary_csv(std::ostream &out, const StudyResult &result);
void write_replicates_csv(std::ostream &out, const StudyResult &result);

} // namespace dpsignal
