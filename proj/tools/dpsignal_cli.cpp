// dpsignal command-line front end. Talks to the library only through the C API.

#include "dpsignal/dpsignal.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Failure {
  int code;
  std::string message;
};

void check(dps_status st) {
  if (st != DPS_OK)
    throw Failure{st == DPS_ERR_INTERNAL ? 1 : static_cast<int>(st), dps_last_error()};
}

[[noreturn]] void usage(const std::string &msg) { throw Failure{2, msg}; }

template <class T, void (*Free)(T *)> struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using TablePtr = std::unique_ptr<dps_table, Deleter<dps_table, dps_table_free>>;
using DrawsPtr = std::unique_ptr<dps_draws, Deleter<dps_draws, dps_draws_free>>;
using DetectionPtr = std::unique_ptr<dps_detection, Deleter<dps_detection, dps_detection_free>>;
using BaselinePtr = std::unique_ptr<dps_baseline, Deleter<dps_baseline, dps_baseline_free>>;
using StudyPtr = std::unique_ptr<dps_study, Deleter<dps_study, dps_study_free>>;

std::string take_string(char *s) {
  std::string out(s ? s : "");
  dps_string_free(s);
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string &text, const char *what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size())
        throw std::invalid_argument(item);
    } catch (const std::exception &) {
      usage(std::string("invalid number '") + item + "' in " + what);
    }
  }
  if (out.empty())
    usage(std::string(what) + " is empty");
  return out;
}

// Stage timer for the manifest.
class Timings {
public:
  template <class F> auto run(const std::string &stage, F &&f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(stage, t0);
    } else {
      auto r = f();
      record(stage, t0);
      return r;
    }
  }
  json to_json() const { return stages_; }

private:
  void record(const std::string &stage, std::chrono::steady_clock::time_point t0) {
    stages_[stage] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  json stages_ = json::object();
};

struct Context {
  std::vector<std::string> argv;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  Timings timings;
  std::vector<std::string> outputs;
};

void write_file(Context &ctx, const fs::path &dir, const std::string &name,
                const std::string &text) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw Failure{4, "cannot write '" + path.string() + "'"};
  ctx.outputs.push_back(name);
}

void prepare_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Failure{4, "cannot create output directory '" + dir.string() + "'"};
}

void write_manifest(Context &ctx, const fs::path &dir, const std::string &command,
                    std::uint64_t seed, json config) {
  const auto t = std::chrono::system_clock::to_time_t(ctx.started);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  json m;
  m["command"] = command;
  m["argv"] = ctx.argv;
  m["seed"] = seed;
  m["config"] = std::move(config);
  m["version"] = dps_version();
  m["started_utc"] = stamp;
  m["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.t0).count();
  m["timings_seconds"] = ctx.timings.to_json();
  m["outputs"] = ctx.outputs;
  std::ofstream out(dir / "manifest.json");
  if (!out || !(out << m.dump(2) << '\n'))
    throw Failure{4, "cannot write manifest in '" + dir.string() + "'"};
}

TablePtr load_table(const std::string &path, const std::string &reference) {
  dps_table *raw = nullptr;
  check(dps_table_read_csv(path.c_str(), &raw));
  TablePtr t(raw);
  if (!reference.empty()) {
    const auto J = dps_table_cols(t.get());
    std::optional<std::size_t> col;
    for (std::size_t j = 0; j < J; ++j)
      if (reference == dps_table_drug_name(t.get(), j))
        col = j;
    if (!col)
      throw Failure{3, "reference column '" + reference + "' not found in '" + path + "'"};
    check(dps_table_set_reference_column(t.get(), *col));
  }
  return t;
}

std::string matrix_csv(const dps_table *t, const std::vector<double> &v, bool integer) {
  char *s = nullptr;
  check(dps_table_matrix_csv(t, v.data(), integer ? 1 : 0, &s));
  return take_string(s);
}

std::size_t cells(const dps_table *t) { return dps_table_rows(t) * dps_table_cols(t); }

// Options shared by the chain-running commands.
struct ChainOptions {
  std::string model = "poisson";
  std::size_t burnin = 5000;
  std::size_t draws = 10000;
  std::size_t thin = 1;
  std::string K = "auto";
  std::string pi_fixed = "none";

  void add(CLI::App *app) {
    app->add_option("--model", model, "poisson or zip")
        ->check(CLI::IsMember({"poisson", "zip"}))
        ->capture_default_str();
    app->add_option("--burnin", burnin, "Burn-in iterations")->capture_default_str();
    app->add_option("--draws", draws, "Retained draws")->capture_default_str();
    app->add_option("--thin", thin, "Thinning interval")->capture_default_str();
    app->add_option("--K", K, "Truncation level: auto or an integer")->capture_default_str();
    app->add_option("--pi-fixed", pi_fixed, "none or a value in [0, 1]")->capture_default_str();
  }

  dps_model_config config() const {
    dps_model_config c;
    dps_model_config_default(&c);
    c.likelihood = model == "zip" ? DPS_ZIP : DPS_POISSON;
    c.n_burn = burnin;
    c.n_keep = draws;
    c.thin = thin;
    if (K != "auto") {
      try {
        std::size_t used = 0;
        const long k = std::stol(K, &used);
        if (used != K.size() || k < 1)
          throw std::invalid_argument(K);
        c.truncation = static_cast<std::size_t>(k);
      } catch (const std::exception &) {
        usage("--K must be 'auto' or a positive integer");
      }
    }
    if (pi_fixed != "none") {
      c.has_pi_fixed = 1;
      c.pi_fixed = parse_list(pi_fixed, "--pi-fixed").front();
    }
    return c;
  }

  json to_json() const {
    return {{"model", model}, {"burnin", burnin}, {"draws", draws},
            {"thin", thin},   {"K", K},           {"pi_fixed", pi_fixed}};
  }
};

unsigned default_threads() {
  if (const char *env = std::getenv("DPSIGNAL_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1)
        return static_cast<unsigned>(v);
    } catch (const std::exception &) {
    }
    std::cerr << "warning: ignoring invalid DPSIGNAL_THREADS='" << env << "'\n";
  }
  return 1;
}

// ---- fit ----

struct FitArgs {
  std::string table, reference, out = ".";
  std::uint64_t seed = 1;
  ChainOptions chain;
};

void cmd_fit(Context &ctx, const FitArgs &a) {
  const auto cfg = a.chain.config();
  auto table = ctx.timings.run("read_table", [&] { return load_table(a.table, a.reference); });
  prepare_dir(a.out);
  const auto *t = table.get();
  DrawsPtr draws = ctx.timings.run("mcmc", [&] {
    dps_draws *raw = nullptr;
    check(dps_fit(t, &cfg, a.seed, 0, &raw));
    return DrawsPtr(raw);
  });
  const auto *d = draws.get();

  ctx.timings.run("summaries", [&] {
    const std::size_t I = dps_table_rows(t), J = dps_table_cols(t), C = I * J;
    std::vector<double> mean(C), q05(C), q50(C), q95(C), qnull(C), expected(C);
    std::vector<std::int64_t> counts(C);
    check(dps_draws_mean(d, mean.data()));
    check(dps_draws_quantile(d, 0.05, q05.data()));
    check(dps_draws_quantile(d, 0.5, q50.data()));
    check(dps_draws_quantile(d, 0.95, q95.data()));
    check(dps_draws_null_probability(d, qnull.data()));
    check(dps_table_counts(t, counts.data()));
    check(dps_table_expected(t, expected.data()));

    std::string s = "ae,drug,n,expected,mean,median,q05,q95,null_prob\n";
    auto quote = [](std::string v) {
      if (v.find_first_of(",\"\n") == std::string::npos)
        return v;
      std::string o = "\"";
      for (char ch : v)
        o += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return o + "\"";
    };
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        const auto c = i * J + j;
        s += quote(dps_table_ae_name(t, i)) + "," + quote(dps_table_drug_name(t, j)) + "," +
             std::to_string(counts[c]) + "," + fmt(expected[c]) + "," + fmt(mean[c]) + "," +
             fmt(q50[c]) + "," + fmt(q05[c]) + "," + fmt(q95[c]) + "," + fmt(qnull[c]) + "\n";
      }
    }
    write_file(ctx, a.out, "posterior_summary.csv", s);

    std::string tr = "parameter,mean,sd,q05,median,q95\n";
    const std::size_t n = dps_draws_count(d);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < dps_draws_trace_count(d); ++k) {
      const char *name = dps_draws_trace_name(d, k);
      std::size_t len = 0;
      check(dps_draws_trace(d, name, v.data(), v.size(), &len));
      std::vector<double> x(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(len));
      double m = 0.0, ss = 0.0;
      for (double e : x)
        m += e;
      m /= static_cast<double>(len);
      for (double e : x)
        ss += (e - m) * (e - m);
      std::sort(x.begin(), x.end());
      auto q = [&](double p) {
        const double h = (static_cast<double>(len) - 1.0) * p;
        const auto lo = static_cast<std::size_t>(h);
        const auto hi = std::min(lo + 1, len - 1);
        return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
      };
      const double sd = len > 1 ? std::sqrt(ss / static_cast<double>(len - 1)) : 0.0;
      tr += std::string(name) + "," + fmt(m) + "," + fmt(sd) + "," + fmt(q(0.05)) + "," +
            fmt(q(0.5)) + "," + fmt(q(0.95)) + "\n";
    }
    write_file(ctx, a.out, "trace_summary.csv", tr);
  });

  ctx.timings.run("write_draws", [&] {
    check(dps_draws_save(d, (fs::path(a.out) / "draws.bin").string().c_str()));
    ctx.outputs.push_back("draws.bin");
  });

  json conf = a.chain.to_json();
  conf["table"] = a.table;
  conf["reference"] = dps_table_drug_name(t, dps_table_reference_column(t));
  conf["truncation"] = cfg.truncation ? cfg.truncation
                                      : dps_default_truncation(dps_table_rows(t), dps_table_cols(t));
  write_manifest(ctx, a.out, "fit", a.seed, conf);
}

// ---- detect ----

struct DetectArgs {
  std::string draws, table, reference, out = ".";
  double alpha = 0.05;
  std::string p_grid, k_grid;
};

void write_detection(Context &ctx, const fs::path &dir, const dps_table *t,
                     const dps_detection *r) {
  const std::size_t C = cells(t);
  std::vector<unsigned char> sig(C);
  std::vector<double> q(C), s(C);
  check(dps_detection_signals(r, sig.data()));
  check(dps_detection_q(r, q.data()));
  for (std::size_t c = 0; c < C; ++c)
    s[c] = sig[c];
  write_file(ctx, dir, "signals.csv", matrix_csv(t, s, true));
  write_file(ctx, dir, "q.csv", matrix_csv(t, q, false));
  json meta = {{"p_hat", dps_detection_p_hat(r)},
               {"k_hat", dps_detection_k_hat(r)},
               {"fdr_hat", dps_detection_fdr_hat(r)},
               {"fnr_hat", dps_detection_fnr_hat(r)},
               {"feasible", dps_detection_feasible(r) != 0}};
  std::size_t n = 0;
  for (auto v : sig)
    n += v;
  meta["n_signals"] = n;
  write_file(ctx, dir, "detection.json", meta.dump(2) + "\n");
}

void cmd_detect(Context &ctx, const DetectArgs &a) {
  std::vector<double> pg, kg;
  if (!a.p_grid.empty())
    pg = parse_list(a.p_grid, "--p-grid");
  if (!a.k_grid.empty())
    kg = parse_list(a.k_grid, "--k-grid");
  auto table = ctx.timings.run("read_table", [&] { return load_table(a.table, a.reference); });
  prepare_dir(a.out);
  DrawsPtr draws = ctx.timings.run("read_draws", [&] {
    dps_draws *raw = nullptr;
    check(dps_draws_load(a.draws.c_str(), &raw));
    return DrawsPtr(raw);
  });
  DetectionPtr det = ctx.timings.run("detect", [&] {
    dps_detection *raw = nullptr;
    check(dps_detect(draws.get(), table.get(), a.alpha, pg.empty() ? nullptr : pg.data(),
                     pg.size(), kg.empty() ? nullptr : kg.data(), kg.size(), &raw));
    return DetectionPtr(raw);
  });
  ctx.timings.run("write", [&] { write_detection(ctx, a.out, table.get(), det.get()); });
  json conf = {{"draws", a.draws}, {"table", a.table}, {"alpha", a.alpha},
               {"p_grid", a.p_grid.empty() ? "default" : a.p_grid},
               {"k_grid", a.k_grid.empty() ? "default" : a.k_grid}};
  write_manifest(ctx, a.out, "detect", 0, conf);
}

// ---- baseline ----

struct BaselineArgs {
  std::string method, table, reference, out = ".";
  double alpha = 0.05;
  std::size_t n_mc = 100000;
  std::size_t n_boot = 1000;
  std::uint64_t seed = 1;
  std::string k_grid;
  ChainOptions chain;
};

void write_baseline(Context &ctx, const fs::path &dir, const dps_table *t,
                    const dps_baseline *b) {
  const std::size_t C = cells(t);
  std::vector<unsigned char> sig(C);
  std::vector<double> s(C), m(C);
  check(dps_baseline_signals(b, sig.data()));
  for (std::size_t c = 0; c < C; ++c)
    s[c] = sig[c];
  write_file(ctx, dir, "signals.csv", matrix_csv(t, s, true));
  for (std::size_t k = 0; k < dps_baseline_matrix_count(b); ++k) {
    const std::string name = dps_baseline_matrix_name(b, k);
    check(dps_baseline_matrix(b, name.c_str(), m.data()));
    write_file(ctx, dir, name + ".csv", matrix_csv(t, m, false));
  }
  json sc = json::object();
  for (std::size_t k = 0; k < dps_baseline_scalar_count(b); ++k) {
    const char *name = dps_baseline_scalar_name(b, k);
    double v = 0.0;
    check(dps_baseline_scalar(b, name, &v));
    sc[name] = v;
  }
  std::size_t n = 0;
  for (auto v : sig)
    n += v;
  sc["n_signals"] = n;
  write_file(ctx, dir, "summary.json", sc.dump(2) + "\n");
}

void cmd_baseline(Context &ctx, BaselineArgs a, unsigned threads) {
  if (a.method != "bcpnn" && a.method != "gps" && a.method != "lrt" && a.method != "dp-hu")
    usage("unknown method '" + a.method + "' (expected bcpnn, gps, lrt or dp-hu)");
  std::vector<double> kg;
  if (!a.k_grid.empty())
    kg = parse_list(a.k_grid, "--k-grid");
  const auto cfg = a.chain.config();
  auto table = ctx.timings.run("read_table", [&] { return load_table(a.table, a.reference); });
  prepare_dir(a.out);
  const auto *t = table.get();
  json conf = {{"method", a.method}, {"table", a.table}, {"alpha", a.alpha}};

  if (a.method == "dp-hu") {
    DetectionPtr det = ctx.timings.run("dp-hu", [&] {
      dps_detection *raw = nullptr;
      check(dps_hu_detect(t, &cfg, a.alpha, kg.empty() ? nullptr : kg.data(), kg.size(), a.seed,
                          0, &raw));
      return DetectionPtr(raw);
    });
    ctx.timings.run("write", [&] { write_detection(ctx, a.out, t, det.get()); });
    conf["chain"] = a.chain.to_json();
    conf["k_grid"] = a.k_grid.empty() ? "default" : a.k_grid;
  } else {
    BaselinePtr b = ctx.timings.run(a.method, [&] {
      dps_baseline *raw = nullptr;
      if (a.method == "bcpnn")
        check(dps_bcpnn(t, a.alpha, a.n_mc, a.seed, 0, &raw));
      else if (a.method == "gps")
        check(dps_gps(t, a.alpha, &raw));
      else
        check(dps_lrt(t, a.alpha, a.n_boot, a.seed, 0, threads, &raw));
      return BaselinePtr(raw);
    });
    ctx.timings.run("write", [&] { write_baseline(ctx, a.out, t, b.get()); });
    if (a.method == "bcpnn")
      conf["n_mc"] = a.n_mc;
    if (a.method == "lrt")
      conf["n_boot"] = a.n_boot;
  }
  write_manifest(ctx, a.out, "baseline", a.seed, conf);
}

// ---- simulate ----

struct SimulateArgs {
  std::string config, table, reference, out = ".";
  // Flag name -> study key; only flags given on the command line are applied.
  std::vector<std::pair<std::string, std::string>> overrides;
};

void cmd_simulate(Context &ctx, const SimulateArgs &a, unsigned threads) {
  std::string text;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in)
      throw Failure{4, "cannot open study config '" + a.config + "'"};
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  dps_study *raw = nullptr;
  check(dps_study_create(text.c_str(), &raw));
  StudyPtr study(raw);
  check(dps_study_set(study.get(), "threads", std::to_string(threads).c_str()));
  for (const auto &[k, v] : a.overrides)
    check(dps_study_set(study.get(), k.c_str(), v.c_str()));

  auto table = ctx.timings.run("read_table", [&] { return load_table(a.table, a.reference); });
  prepare_dir(a.out);
  ctx.timings.run("study", [&] { check(dps_study_run(study.get(), table.get())); });
  ctx.timings.run("write", [&] {
    char *s = nullptr;
    check(dps_study_summary_csv(study.get(), &s));
    write_file(ctx, a.out, "summary.csv", take_string(s));
    check(dps_study_replicates_csv(study.get(), &s));
    write_file(ctx, a.out, "replicates.csv", take_string(s));
  });

  char *cfg_text = nullptr;
  check(dps_study_config_text(study.get(), &cfg_text));
  const std::string echo = take_string(cfg_text);
  json conf = json::object();
  std::stringstream ss(echo);
  std::string line;
  std::uint64_t seed = 0;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      continue;
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t"), e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const auto k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    conf[k] = v;
    if (k == "seed")
      seed = std::stoull(v);
  }
  conf["table"] = a.table;
  write_manifest(ctx, a.out, "simulate", seed, conf);
}

} // namespace

int main(int argc, char **argv) {
  Context ctx;
  ctx.argv.assign(argv, argv + argc);

  CLI::App app{"Bayesian pharmacovigilance signal detection with local-global Dirichlet "
               "process models"};
  app.set_version_flag("--version", std::string(dps_version()));
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: $DPSIGNAL_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  FitArgs fit;
  auto *fit_cmd = app.add_subcommand("fit", "Run the local-global DP sampler on a table");
  fit_cmd->add_option("--table", fit.table, "AE x drug count table (CSV)")->required();
  fit_cmd->add_option("--reference", fit.reference, "Name of the reference column (default: last)");
  fit_cmd->add_option("--out", fit.out, "Output directory")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  fit.chain.add(fit_cmd);

  DetectArgs det;
  auto *det_cmd = app.add_subcommand("detect", "Select signals from a saved posterior");
  det_cmd->add_option("--draws", det.draws, "Draws archive written by 'fit'")->required();
  det_cmd->add_option("--table", det.table, "The table the draws were fitted on")->required();
  det_cmd->add_option("--reference", det.reference, "Name of the reference column");
  det_cmd->add_option("--alpha", det.alpha, "FDR cap")->capture_default_str();
  det_cmd->add_option("--p-grid", det.p_grid, "Comma-separated quantile levels");
  det_cmd->add_option("--k-grid", det.k_grid, "Comma-separated thresholds");
  det_cmd->add_option("--out", det.out, "Output directory")->capture_default_str();

  BaselineArgs base;
  auto *base_cmd = app.add_subcommand("baseline", "Run a comparison method");
  base_cmd->add_option("--method", base.method, "bcpnn, gps, lrt or dp-hu")->required();
  base_cmd->add_option("--table", base.table, "AE x drug count table (CSV)")->required();
  base_cmd->add_option("--reference", base.reference, "Name of the reference column");
  base_cmd->add_option("--alpha", base.alpha, "FDR cap or test level")->capture_default_str();
  base_cmd->add_option("--n-mc", base.n_mc, "BCPNN Monte Carlo draws")->capture_default_str();
  base_cmd->add_option("--n-boot", base.n_boot, "LRT bootstrap tables")->capture_default_str();
  base_cmd->add_option("--seed", base.seed, "Random seed")->capture_default_str();
  base_cmd->add_option("--k-grid", base.k_grid, "dp-hu: comma-separated thresholds");
  base_cmd->add_option("--out", base.out, "Output directory")->capture_default_str();
  base.chain.add(base_cmd);

  SimulateArgs sim;
  auto *sim_cmd = app.add_subcommand("simulate", "Run a replicated simulation study");
  sim_cmd->add_option("--table", sim.table, "Table supplying the margins")->required();
  sim_cmd->add_option("--reference", sim.reference, "Name of the reference column");
  sim_cmd->add_option("--config", sim.config, "Study config file (key = value lines)");
  sim_cmd->add_option("--out", sim.out, "Output directory")->capture_default_str();
  const std::vector<std::pair<std::string, std::string>> sim_flags = {
      {"scenario", "scenario"},   {"n-fixed", "n_fixed"},
      {"n-random", "n_random"},   {"zi-rate", "zi_rate"},
      {"lambda-signal", "lambda_signal"}, {"replicates", "replicates"},
      {"methods", "methods"},     {"seed", "seed"},
      {"burnin", "burnin"},       {"draws", "draws"},
      {"thin", "thin"},           {"K", "K"},
      {"alpha", "alpha"},         {"n-mc", "n_mc"},
      {"n-boot", "n_boot"},       {"p-grid", "p_grid"},
      {"k-grid", "k_grid"}};
  std::vector<std::string> sim_values(sim_flags.size());
  for (std::size_t k = 0; k < sim_flags.size(); ++k)
    sim_cmd->add_option("--" + sim_flags[k].first, sim_values[k],
                        "Overrides config key '" + sim_flags[k].second + "'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) {
      cmd_fit(ctx, fit);
    } else if (*det_cmd) {
      cmd_detect(ctx, det);
    } else if (*base_cmd) {
      cmd_baseline(ctx, base, threads);
    } else if (*sim_cmd) {
      for (std::size_t k = 0; k < sim_flags.size(); ++k)
        if (sim_cmd->count("--" + sim_flags[k].first))
          sim.overrides.emplace_back(sim_flags[k].second, sim_values[k]);
      cmd_simulate(ctx, sim, threads);
    }
  } catch (const Failure &f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
