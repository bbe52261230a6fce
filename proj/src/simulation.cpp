#include "dpsignal/simulation.hpp"

#include "dpsignal/baselines.hpp"
#include "dpsignal/detection.hpp"
#include "dpsignal/error.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace dpsignal {

namespace {

// First k entries of v become a uniform random k-subset.
template <class T> void partial_shuffle(std::vector<T> &v, std::size_t k, RngStream &rng) {
  for (std::size_t a = 0; a < k && a < v.size(); ++a) {
    const std::size_t span = v.size() - a;
    auto b = a + static_cast<std::size_t>(rng.uniform() * static_cast<double>(span));
    if (b >= v.size())
      b = v.size() - 1;
    std::swap(v[a], v[b]);
  }
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

double parse_double(std::string_view s, std::string_view key) {
  s = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw usage_error("invalid number '" + std::string(s) + "' for " + std::string(key));
  return v;
}

std::uint64_t parse_uint(std::string_view s, std::string_view key) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw usage_error("invalid non-negative integer '" + std::string(s) + "' for " +
                      std::string(key));
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto c = s.find(',', pos);
    if (c == std::string_view::npos)
      c = s.size();
    auto item = trim(s.substr(pos, c - pos));
    if (!item.empty())
      out.push_back(item);
    pos = c + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void SimulationScenario::validate() const {
  if (!(zi_rate >= 0.0 && zi_rate < 1.0))
    throw validation_error("zero-inflation rate must lie in [0, 1)");
  if (!(signal_strength > 1.0) || !std::isfinite(signal_strength))
    throw validation_error("signal strength must exceed 1");
}

std::optional<SimulationScenario> scenario_preset(std::string_view id) {
  struct Row {
    const char *id;
    std::size_t fixed, random;
    double zi;
  };
  static constexpr Row rows[] = {{"0a", 1, 30, 0.0},  {"0b", 1, 30, 0.3},
                                 {"1a", 3, 20, 0.0},  {"1b", 3, 20, 0.3},
                                 {"2a", 10, 10, 0.0}, {"2b", 10, 10, 0.3},
                                 {"3a", 20, 3, 0.0},  {"3b", 20, 3, 0.3}};
  for (const auto &r : rows) {
    if (id == r.id) {
      SimulationScenario s;
      s.id = r.id;
      s.n_fixed_rows = r.fixed;
      s.n_random_per_col = r.random;
      s.zi_rate = r.zi;
      return s;
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> TruthMatrix::drug_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < lambda0.cols(); ++j)
    if (j != reference_column)
      out.push_back(j);
  return out;
}

TruthMatrix build_lambda0(const SimulationScenario &scenario, std::size_t rows,
                          std::size_t cols, std::size_t reference_column, RngStream &rng) {
  scenario.validate();
  if (reference_column >= cols)
    throw validation_error("reference column out of range");
  std::vector<std::size_t> avail(rows);
  std::iota(avail.begin(), avail.end(), 0);
  if (scenario.protect_last_row && !avail.empty())
    avail.pop_back();
  if (scenario.n_fixed_rows + scenario.n_random_per_col > avail.size())
    throw validation_error("scenario needs " +
                           std::to_string(scenario.n_fixed_rows + scenario.n_random_per_col) +
                           " signal rows but only " + std::to_string(avail.size()) +
                           " are available");

  TruthMatrix t;
  t.reference_column = reference_column;
  t.lambda0 = Matrix<double>(rows, cols, 1.0);
  t.signal_mask = BinaryMatrix(rows, cols, 0);
  t.zero_mask = BinaryMatrix(rows, cols, 0);

  partial_shuffle(avail, scenario.n_fixed_rows, rng);
  const std::vector<std::size_t> fixed(avail.begin(),
                                       avail.begin() + static_cast<std::ptrdiff_t>(scenario.n_fixed_rows));
  std::vector<std::size_t> rest(avail.begin() + static_cast<std::ptrdiff_t>(scenario.n_fixed_rows),
                                avail.end());
  const auto n_zero = static_cast<std::size_t>(std::llround(scenario.zi_rate * static_cast<double>(rows)));

  for (std::size_t j : t.drug_columns()) {
    for (auto i : fixed)
      t.signal_mask(i, j) = 1;
    auto pool = rest;
    partial_shuffle(pool, scenario.n_random_per_col, rng);
    for (std::size_t k = 0; k < scenario.n_random_per_col; ++k)
      t.signal_mask(pool[k], j) = 1;

    std::vector<std::size_t> nulls;
    for (auto i : avail)
      if (!t.signal_mask(i, j))
        nulls.push_back(i);
    std::sort(nulls.begin(), nulls.end());
    if (n_zero > nulls.size())
      throw validation_error("not enough non-signal cells for the zero-inflation rate");
    partial_shuffle(nulls, n_zero, rng);
    for (std::size_t k = 0; k < n_zero; ++k)
      t.zero_mask(nulls[k], j) = 1;

    for (std::size_t i = 0; i < rows; ++i) {
      if (t.signal_mask(i, j))
        t.lambda0(i, j) = scenario.signal_strength;
      else if (t.zero_mask(i, j))
        t.lambda0(i, j) = 0.0;
    }
  }
  return t;
}

Matrix<std::int64_t> generate_counts(const TruthMatrix &truth, const ContingencyTable &reference,
                                     RngStream &rng) {
  const std::size_t I = reference.rows(), J = reference.cols();
  if (truth.lambda0.rows() != I || truth.lambda0.cols() != J)
    throw validation_error("truth matrix does not match the reference table");
  std::vector<double> rc(I), cc(J);
  for (std::size_t i = 0; i < I; ++i)
    rc[i] = static_cast<double>(reference.row_total(i));
  for (std::size_t j = 0; j < J; ++j)
    cc[j] = static_cast<double>(reference.col_total(j));
  const auto pr = sample_dirichlet(rc, rng);
  const auto pc = sample_dirichlet(cc, rng);

  std::vector<double> p(I * J);
  double total = 0.0;
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j)
      total += p[i * J + j] = truth.lambda0(i, j) * pr[i] * pc[j];
  for (double &v : p)
    v /= total;
  auto draws = sample_multinomial(reference.grand_total(), p, rng);
  Matrix<std::int64_t> counts(I, J);
  counts.data() = std::move(draws);
  return counts;
}

ContingencyTable generate_table(const TruthMatrix &truth, const ContingencyTable &reference,
                                RngStream &rng) {
  auto counts = generate_counts(truth, reference, rng);
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (truth.signal_mask.data()[c] && counts.data()[c] == 1)
      counts.data()[c] = 0;
  return ContingencyTable(std::move(counts), reference.ae_names(), reference.drug_names(),
                          reference.reference_column());
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw validation_error("kendall_tau needs two equal-length vectors of length >= 2");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  auto pairs = [](std::int64_t t) { return t * (t - 1) / 2; };
  const auto n0 = pairs(static_cast<std::int64_t>(n));
  std::int64_t n1 = 0, n3 = 0;
  for (std::size_t a = 0; a < n;) {
    std::size_t b = a;
    while (b < n && x[idx[b]] == x[idx[a]])
      ++b;
    n1 += pairs(static_cast<std::int64_t>(b - a));
    for (std::size_t c = a; c < b;) {
      std::size_t d = c;
      while (d < b && y[idx[d]] == y[idx[c]])
        ++d;
      n3 += pairs(static_cast<std::int64_t>(d - c));
      c = d;
    }
    a = b;
  }

  // Count discordant pairs as strict inversions of y during a merge sort.
  std::vector<double> v(n), buf(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = y[idx[k]];
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, o = lo;
      while (a < mid && b < hi) {
        if (v[b] < v[a]) {
          swaps += static_cast<std::int64_t>(mid - a);
          buf[o++] = v[b++];
        } else {
          buf[o++] = v[a++];
        }
      }
      while (a < mid)
        buf[o++] = v[a++];
      while (b < hi)
        buf[o++] = v[b++];
    }
    std::swap(v, buf);
  }
  std::int64_t n2 = 0;
  for (std::size_t a = 0; a < n;) {
    std::size_t b = a;
    while (b < n && v[b] == v[a])
      ++b;
    n2 += pairs(static_cast<std::int64_t>(b - a));
    a = b;
  }
  if (n1 == n0 || n2 == n0)
    throw validation_error("kendall_tau is undefined for a constant vector");
  const double num = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
  return num / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

double average_kendall_tau(const TruthMatrix &truth) {
  const auto cols = truth.drug_columns();
  const std::size_t I = truth.lambda0.rows();
  std::vector<std::vector<double>> c(cols.size(), std::vector<double>(I));
  for (std::size_t k = 0; k < cols.size(); ++k)
    for (std::size_t i = 0; i < I; ++i)
      c[k][i] = truth.lambda0(i, cols[k]);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t a = 0; a < cols.size(); ++a)
    for (std::size_t b = a + 1; b < cols.size(); ++b, ++n)
      sum += kendall_tau(c[a], c[b]);
  if (n == 0)
    throw validation_error("need at least two drug columns");
  return sum / static_cast<double>(n);
}

ConfusionCounts confusion(const BinaryMatrix &signals, const TruthMatrix &truth) {
  if (!signals.same_shape(truth.signal_mask))
    throw validation_error("signal matrix does not match the truth dimensions");
  ConfusionCounts c;
  for (std::size_t j : truth.drug_columns()) {
    for (std::size_t i = 0; i < signals.rows(); ++i) {
      const bool s = truth.signal_mask(i, j), f = signals(i, j);
      if (s)
        (f ? c.tp : c.fn)++;
      else
        (f ? c.fp : c.tn)++;
    }
  }
  return c;
}

EvaluationMetrics evaluate_detection(const BinaryMatrix &signals, const TruthMatrix &truth) {
  const auto c = confusion(signals, truth);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  return {ratio(fp, fp + tp), ratio(tp, tp + fn), ratio(fp, tn), ratio(2 * tp, 2 * tp + fn + fp)};
}

std::string_view method_name(Method m) {
  switch (m) {
  case Method::lg_poisson:
    return "lg-poisson";
  case Method::lg_zip:
    return "lg-zip";
  case Method::dp_hu:
    return "dp-hu";
  case Method::bcpnn:
    return "bcpnn";
  case Method::gps:
    return "gps";
  case Method::lrt:
    return "lrt";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : {Method::lg_poisson, Method::lg_zip, Method::dp_hu, Method::bcpnn, Method::gps,
                 Method::lrt})
    if (name == method_name(m))
      return m;
  throw usage_error("unknown method '" + std::string(name) + "'");
}

void StudyConfig::validate() const {
  if (replicates < 1)
    throw usage_error("replicates must be at least 1");
  if (lambda_signals.empty())
    throw usage_error("at least one signal strength is required");
  if (methods.empty())
    throw usage_error("at least one method is required");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw usage_error("alpha must lie in [0, 1]");
  for (double l : lambda_signals) {
    auto s = scenario;
    s.signal_strength = l;
    s.validate();
  }
  mcmc.validate();
}

StudyConfig parse_study_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (auto h = l.find('#'); h != std::string_view::npos)
      l = l.substr(0, h);
    l = trim(l);
    if (l.empty())
      continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw usage_error("study config line " + std::to_string(line_no) + " lacks '='");
    kv.emplace_back(std::string(trim(l.substr(0, eq))), std::string(trim(l.substr(eq + 1))));
  }

  StudyConfig c;
  for (const auto &[k, v] : kv) {
    if (k == "scenario") {
      auto s = scenario_preset(v);
      if (!s)
        throw usage_error("unknown scenario '" + v + "'");
      c.scenario = *s;
    }
  }
  for (const auto &[k, v] : kv) {
    if (k == "scenario")
      continue;
    if (k == "n_fixed")
      c.scenario.n_fixed_rows = parse_uint(v, k);
    else if (k == "n_random")
      c.scenario.n_random_per_col = parse_uint(v, k);
    else if (k == "zi_rate")
      c.scenario.zi_rate = parse_double(v, k);
    else if (k == "protect_last_row")
      c.scenario.protect_last_row = parse_uint(v, k) != 0;
    else if (k == "lambda_signal") {
      c.lambda_signals.clear();
      for (auto item : split_list(v))
        c.lambda_signals.push_back(parse_double(item, k));
    } else if (k == "replicates")
      c.replicates = parse_uint(v, k);
    else if (k == "methods") {
      c.methods.clear();
      for (auto item : split_list(v))
        c.methods.push_back(parse_method(item));
    } else if (k == "seed")
      c.seed = parse_uint(v, k);
    else if (k == "burnin")
      c.mcmc.n_burn = parse_uint(v, k);
    else if (k == "draws")
      c.mcmc.n_keep = parse_uint(v, k);
    else if (k == "thin")
      c.mcmc.thin = parse_uint(v, k);
    else if (k == "K")
      c.mcmc.truncation = v == "auto" ? 0 : parse_uint(v, k);
    else if (k == "alpha")
      c.alpha = parse_double(v, k);
    else if (k == "n_mc")
      c.n_mc = parse_uint(v, k);
    else if (k == "n_boot")
      c.n_boot = parse_uint(v, k);
    else if (k == "threads")
      c.threads = static_cast<unsigned>(parse_uint(v, k));
    else if (k == "p_grid") {
      c.p_grid.clear();
      for (auto item : split_list(v))
        c.p_grid.push_back(parse_double(item, k));
    } else if (k == "k_grid") {
      c.k_grid.clear();
      for (auto item : split_list(v))
        c.k_grid.push_back(parse_double(item, k));
    } else
      throw usage_error("unknown study config key '" + k + "'");
  }
  return c;
}

std::string to_text(const StudyConfig &c) {
  std::ostringstream o;
  auto list = [](const std::vector<double> &v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k)
      s += (k ? "," : "") + fmt_g(v[k]);
    return s;
  };
  if (!c.scenario.id.empty())
    o << "scenario=" << c.scenario.id << '\n';
  o << "n_fixed=" << c.scenario.n_fixed_rows << '\n'
    << "n_random=" << c.scenario.n_random_per_col << '\n'
    << "zi_rate=" << fmt_g(c.scenario.zi_rate) << '\n'
    << "protect_last_row=" << (c.scenario.protect_last_row ? 1 : 0) << '\n'
    << "lambda_signal=" << list(c.lambda_signals) << '\n'
    << "replicates=" << c.replicates << '\n'
    << "methods=";
  for (std::size_t k = 0; k < c.methods.size(); ++k)
    o << (k ? "," : "") << method_name(c.methods[k]);
  o << '\n'
    << "seed=" << c.seed << '\n'
    << "burnin=" << c.mcmc.n_burn << '\n'
    << "draws=" << c.mcmc.n_keep << '\n'
    << "thin=" << c.mcmc.thin << '\n'
    << "K=" << (c.mcmc.truncation ? std::to_string(c.mcmc.truncation) : "auto") << '\n'
    << "alpha=" << fmt_g(c.alpha) << '\n'
    << "n_mc=" << c.n_mc << '\n'
    << "n_boot=" << c.n_boot << '\n';
  if (!c.p_grid.empty())
    o << "p_grid=" << list(c.p_grid) << '\n';
  if (!c.k_grid.empty())
    o << "k_grid=" << list(c.k_grid) << '\n';
  return o.str();
}

namespace {

BinaryMatrix run_method(Method m, const ContingencyTable &table, const StudyConfig &c,
                        std::span<const double> p_grid, std::span<const double> k_grid,
                        RngStream &rng) {
  switch (m) {
  case Method::lg_poisson:
  case Method::lg_zip: {
    ModelConfig cfg = c.mcmc;
    cfg.likelihood = m == Method::lg_zip ? Likelihood::zip : Likelihood::poisson;
    cfg.pi_fixed.reset();
    const auto draws = LocalGlobalSampler(table, expected_counts(table), cfg).run(rng);
    return grid_search_detect(draws, table, c.alpha, p_grid, k_grid).signals;
  }
  case Method::dp_hu:
    return dp_hu_detect(table, c.mcmc, c.alpha, rng, k_grid).signals;
  case Method::bcpnn:
    return bcpnn_detect(table, c.alpha, c.n_mc, rng).signals;
  case Method::gps:
    return gps_detect(table, gps_fit(table).hyper, c.alpha).signals;
  case Method::lrt:
    return pseudo_lrt_detect(table, c.alpha, c.n_boot, rng, 1).signals;
  }
  throw usage_error("unknown method");
}

} // namespace

StudyResult run_study(const StudyConfig &config, const ContingencyTable &reference) {
  config.validate();
  const auto p_grid = config.p_grid.empty() ? default_p_grid() : config.p_grid;
  const auto k_grid = config.k_grid.empty() ? default_k_grid() : config.k_grid;
  const std::size_t L = config.lambda_signals.size(), R = config.replicates;
  const std::size_t M = config.methods.size();
  const RngStream base(config.seed, 0);

  // Job (l, r) fills records [(l * R + r) * M, ... + M).
  std::vector<ReplicateRecord> records(L * R * M);
  auto job = [&](std::size_t l, std::size_t r) {
    const RngStream rep = base.substream(r);
    auto scenario = config.scenario;
    scenario.signal_strength = config.lambda_signals[l];
    ReplicateRecord *out = &records[(l * R + r) * M];
    for (std::size_t m = 0; m < M; ++m) {
      out[m].replicate = r;
      out[m].lambda_signal = scenario.signal_strength;
      out[m].method = config.methods[m];
    }
    try {
      RngStream truth_rng = rep.substream(0);
      const auto truth = build_lambda0(scenario, reference.rows(), reference.cols(),
                                       reference.reference_column(), truth_rng);
      RngStream table_rng = rep.substream(1).substream(l);
      // Rare AEs can come out with an all-zero row; such a table has no
      // expected counts, so redraw it from the same stream.
      std::optional<ContingencyTable> generated;
      for (int attempt = 0; !generated; ++attempt) {
        try {
          generated.emplace(generate_table(truth, reference, table_rng));
        } catch (const Error &e) {
          if (e.kind() != ErrorKind::validation || attempt == 99)
            throw;
        }
      }
      const auto &table = *generated;
      for (std::size_t m = 0; m < M; ++m) {
        try {
          RngStream mrng =
              rep.substream(2).substream(l).substream(static_cast<std::uint64_t>(config.methods[m]));
          const auto signals = run_method(config.methods[m], table, config, p_grid, k_grid, mrng);
          out[m].counts = confusion(signals, truth);
          out[m].metrics = evaluate_detection(signals, truth);
        } catch (const std::exception &e) {
          out[m].ok = false;
          out[m].error = e.what();
        }
      }
    } catch (const std::exception &e) {
      for (std::size_t m = 0; m < M; ++m) {
        out[m].ok = false;
        out[m].error = e.what();
      }
    }
  };

  const std::size_t n_jobs = L * R;
  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads,
                                                           static_cast<unsigned>(n_jobs)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n_jobs;)
      job(k / R, k % R);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
  }

  StudyResult res;
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t m = 0; m < M; ++m) {
      MethodSummary s;
      s.method = config.methods[m];
      s.lambda_signal = config.lambda_signals[l];
      std::vector<EvaluationMetrics> ok;
      for (std::size_t r = 0; r < R; ++r) {
        const auto &rec = records[(l * R + r) * M + m];
        if (rec.ok)
          ok.push_back(rec.metrics);
        else
          ++s.n_failed;
      }
      s.n_ok = ok.size();
      auto stat = [&](double EvaluationMetrics::*f, double &mean, double &se) {
        mean = se = 0.0;
        if (ok.empty())
          return;
        for (const auto &e : ok)
          mean += e.*f;
        mean /= static_cast<double>(ok.size());
        if (ok.size() < 2)
          return;
        double ss = 0.0;
        for (const auto &e : ok)
          ss += (e.*f - mean) * (e.*f - mean);
        se = std::sqrt(ss / static_cast<double>(ok.size() - 1) / static_cast<double>(ok.size()));
      };
      stat(&EvaluationMetrics::fdr, s.mean.fdr, s.se.fdr);
      stat(&EvaluationMetrics::sensitivity, s.mean.sensitivity, s.se.sensitivity);
      stat(&EvaluationMetrics::type1, s.mean.type1, s.se.type1);
      stat(&EvaluationMetrics::f_score, s.mean.f_score, s.se.f_score);
      res.summaries.push_back(s);
    }
  }
  // Replicate log ordered by (lambda, replicate, method).
  res.replicates = std::move(records);
  return res;
}

void write_summary_csv(std::ostream &out, const StudyResult &result) {
  out << "method,lambda_signal,replicates_ok,replicates_failed,fdr,fdr_se,sensitivity,"
         "sensitivity_se,type1,type1_se,f_score,f_score_se\n";
  for (const auto &s : result.summaries)
    out << method_name(s.method) << ',' << fmt_g(s.lambda_signal) << ',' << s.n_ok << ','
        << s.n_failed << ',' << fmt(s.mean.fdr) << ',' << fmt(s.se.fdr) << ','
        << fmt(s.mean.sensitivity) << ',' << fmt(s.se.sensitivity) << ',' << fmt(s.mean.type1)
        << ',' << fmt(s.se.type1) << ',' << fmt(s.mean.f_score) << ',' << fmt(s.se.f_score)
        << '\n';
}

void write_replicates_csv(std::ostream &out, const StudyResult &result) {
  out << "replicate,lambda_signal,method,ok,tp,fp,fn,tn,fdr,sensitivity,type1,f_score,error\n";
  for (const auto &r : result.replicates)
    out << r.replicate << ',' << fmt_g(r.lambda_signal) << ',' << method_name(r.method) << ','
        << (r.ok ? 1 : 0) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.fn
        << ',' << r.counts.tn << ',' << fmt(r.metrics.fdr) << ',' << fmt(r.metrics.sensitivity)
        << ',' << fmt(r.metrics.type1) << ',' << fmt(r.metrics.f_score) << ','
        << csv_escape(r.error) << '\n';
}

} // namespace dpsignal
