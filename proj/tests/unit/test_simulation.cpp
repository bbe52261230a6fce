#include "doctest.h"
#include "support.hpp"

#include "dpsignal/archive.hpp"
#include "dpsignal/error.hpp"
#include "dpsignal/simulation.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace dpsignal;

namespace {

double tau_brute(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = x.size();
  double conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dx = x[a] - x[b], dy = y[a] - y[b];
      if (dx == 0 && dy == 0)
        continue;
      if (dx == 0)
        ++tx;
      else if (dy == 0)
        ++ty;
      else if ((dx > 0) == (dy > 0))
        ++conc;
      else
        ++disc;
    }
  }
  return (conc - disc) / std::sqrt((conc + disc + tx) * (conc + disc + ty));
}

ContingencyTable flat_reference(std::size_t I, std::size_t J, std::int64_t each) {
  Matrix<std::int64_t> m(I, J, each);
  std::vector<std::string> a, d;
  for (std::size_t k = 0; k < I; ++k)
    a.push_back("ae" + std::to_string(k));
  for (std::size_t k = 0; k < J; ++k)
    d.push_back("d" + std::to_string(k));
  return ContingencyTable(m, a, d);
}

} // namespace

TEST_CASE("scenario presets") {
  const auto s3a = scenario_preset("3a");
  REQUIRE(s3a);
  CHECK(s3a->n_fixed_rows == 20);
  CHECK(s3a->n_random_per_col == 3);
  CHECK(s3a->zi_rate == 0.0);
  CHECK(scenario_preset("3b")->zi_rate == 0.3);
  CHECK(scenario_preset("2a")->n_fixed_rows == 10);
  CHECK(!scenario_preset("4a"));
  SimulationScenario bad = *s3a;
  bad.signal_strength = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("build_lambda0 structure") {
  RngStream rng(1, 0);
  for (const char *id : {"0a", "1b", "2a", "3b"}) {
    const auto sc = *scenario_preset(id);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t I = 47, J = 7, ref = 6;
      const auto t = build_lambda0(sc, I, J, ref, rng);
      const auto drugs = t.drug_columns();
      REQUIRE(drugs.size() == 6);
      for (std::size_t i = 0; i < I; ++i)
        CHECK(t.lambda0(i, ref) == 1.0);
      // Fixed rows: signal in every statin column.
      std::size_t fixed = 0;
      for (std::size_t i = 0; i < I; ++i) {
        std::size_t c = 0;
        for (auto j : drugs)
          c += t.signal_mask(i, j);
        fixed += c == drugs.size();
      }
      CHECK(fixed >= sc.n_fixed_rows);
      const std::size_t zeros = static_cast<std::size_t>(std::lround(sc.zi_rate * I));
      for (auto j : drugs) {
        std::size_t sig = 0, zer = 0;
        for (std::size_t i = 0; i < I; ++i) {
          REQUIRE(!(t.signal_mask(i, j) && t.zero_mask(i, j)));
          sig += t.signal_mask(i, j);
          zer += t.zero_mask(i, j);
          const double want = t.signal_mask(i, j) ? 2.0 : t.zero_mask(i, j) ? 0.0 : 1.0;
          REQUIRE(t.lambda0(i, j) == want);
        }
        CHECK(sig == sc.n_fixed_rows + sc.n_random_per_col);
        CHECK(zer == zeros);
        // The collapsed last row stays a plain null row.
        CHECK(t.lambda0(I - 1, j) == 1.0);
      }
    }
  }
  SimulationScenario too_many;
  too_many.n_fixed_rows = 40;
  too_many.n_random_per_col = 10;
  CHECK_THROWS_AS(build_lambda0(too_many, 47, 7, 6, rng), Error);
}

TEST_CASE("generate_table contract") {
  const auto ref = testsupport::statin_table();
  RngStream rng(2, 0);
  const auto sc = *scenario_preset("3b");
  for (int rep = 0; rep < 20; ++rep) {
    const auto truth = build_lambda0(sc, ref.rows(), ref.cols(), ref.reference_column(), rng);
    RngStream a = rng.substream(rep), b = rng.substream(rep);
    const auto counts = generate_counts(truth, ref, a);
    std::int64_t total = 0, collapsed = 0;
    for (std::size_t i = 0; i < counts.rows(); ++i) {
      for (std::size_t j = 0; j < counts.cols(); ++j) {
        total += counts(i, j);
        if (truth.zero_mask(i, j))
          REQUIRE(counts(i, j) == 0);
        collapsed += truth.signal_mask(i, j) && counts(i, j) == 1;
      }
    }
    CHECK(total == ref.grand_total());
    const auto t = generate_table(truth, ref, b);
    CHECK(t.grand_total() == ref.grand_total() - collapsed);
    for (std::size_t i = 0; i < t.rows(); ++i)
      for (std::size_t j = 0; j < t.cols(); ++j)
        if (truth.signal_mask(i, j))
          CHECK(t.count(i, j) != 1);
  }
}

TEST_CASE("null truth with a huge total concentrates on expectation") {
  const auto ref = flat_reference(5, 3, 10000000 / 15);
  SimulationScenario none;
  none.id = "null";
  RngStream rng(3, 0);
  const auto truth = build_lambda0(none, 5, 3, 2, rng);
  const auto t = generate_table(truth, ref, rng);
  const auto E = expected_counts(t);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(t.count(i, j) / E(i, j) - 1.0) < 0.1);
}

TEST_CASE("Kendall tau-b") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  CHECK(kendall_tau(x, x) == doctest::Approx(1.0));
  CHECK(kendall_tau(x, rev) == doctest::Approx(-1.0));
  const std::vector<double> flat(5, 1.0);
  CHECK_THROWS_AS(kendall_tau(x, flat), Error);
  CHECK_THROWS_AS(kendall_tau(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);

  RngStream rng(4, 0);
  for (std::size_t n = 2; n <= 200; ++n) {
    std::vector<double> a(n), b(n);
    const int levels = 1 + static_cast<int>(rng() % 6);
    for (std::size_t k = 0; k < n; ++k) {
      // Mix heavily tied and continuous inputs.
      a[k] = n % 3 == 0 ? rng.uniform() : static_cast<double>(rng() % (levels + 1));
      b[k] = n % 5 == 0 ? rng.uniform() : static_cast<double>(rng() % (levels + 1));
    }
    a[0] = 0.0;
    a[1] = 1.0;
    b[0] = 0.0;
    b[1] = 1.0;
    REQUIRE(kendall_tau(a, b) == doctest::Approx(tau_brute(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("evaluation metrics") {
  TruthMatrix t;
  t.lambda0 = Matrix<double>(3, 3, 1.0);
  t.signal_mask = BinaryMatrix(3, 3, 0);
  t.zero_mask = BinaryMatrix(3, 3, 0);
  t.reference_column = 2;
  t.signal_mask(0, 0) = 1;
  t.signal_mask(1, 1) = 1;
  t.lambda0(0, 0) = t.lambda0(1, 1) = 2.0;

  const auto perfect = evaluate_detection(t.signal_mask, t);
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.fdr == 0.0);
  CHECK(perfect.f_score == 1.0);
  CHECK(perfect.type1 == 0.0);

  const auto empty = evaluate_detection(BinaryMatrix(3, 3, 0), t);
  CHECK(empty.sensitivity == 0.0);
  CHECK(empty.fdr == 0.0);
  CHECK(empty.type1 == 0.0);
  CHECK(empty.f_score == 0.0);

  BinaryMatrix half(3, 3, 0);
  half(0, 0) = 1;
  half(2, 0) = 1;
  half(2, 2) = 1; // reference column: not scored
  const auto c = confusion(half, t);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 3);
  const auto m = evaluate_detection(half, t);
  CHECK(m.fdr == 0.5);
  CHECK(m.sensitivity == 0.5);
  CHECK(m.f_score == 0.5);
  CHECK(m.type1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("methods and study configuration") {
  for (auto m : {Method::lg_poisson, Method::lg_zip, Method::dp_hu, Method::bcpnn, Method::gps,
                 Method::lrt})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("nope"), Error);

  const auto c = parse_study_config("# demo\nscenario = 2b\nlambda_signal = 2,3\nreplicates = 4\n"
                                    "methods = lg-zip,gps\nseed = 99\nburnin = 10\ndraws = 20\n"
                                    "K = 5\nalpha = 0.1\n");
  CHECK(c.scenario.id == "2b");
  CHECK(c.scenario.zi_rate == 0.3);
  CHECK(c.lambda_signals == std::vector<double>{2.0, 3.0});
  CHECK(c.replicates == 4);
  CHECK(c.methods == std::vector<Method>{Method::lg_zip, Method::gps});
  CHECK(c.seed == 99);
  CHECK(c.mcmc.n_burn == 10);
  CHECK(c.mcmc.n_keep == 20);
  CHECK(c.mcmc.truncation == 5);
  CHECK(c.alpha == 0.1);

  const auto again = parse_study_config(to_text(c));
  CHECK(to_text(again) == to_text(c));

  CHECK_THROWS_AS(parse_study_config("bogus = 1\n"), Error);
  CHECK_THROWS_AS(parse_study_config("replicates = -3\n"), Error);
  CHECK_THROWS_AS(parse_study_config("scenario = 9z\n"), Error);
  CHECK_THROWS_AS(parse_study_config("replicates\n"), Error);
}

TEST_CASE("smoke study runs every method and is deterministic") {
  const auto ref = testsupport::statin_table();
  StudyConfig cfg = parse_study_config("scenario = 3a\nreplicates = 2\nseed = 5\nburnin = 20\n"
                                       "draws = 40\nn_mc = 1000\nn_boot = 100\n"
                                       "methods = lg-poisson,lg-zip,dp-hu,bcpnn,gps,lrt\n");
  const auto a = run_study(cfg, ref);
  cfg.threads = 3;
  const auto b = run_study(cfg, ref);
  REQUIRE(a.summaries.size() == 6);
  CHECK(a.replicates.size() == 12);
  for (const auto &s : a.summaries) {
    CHECK(s.n_ok + s.n_failed == 2);
    for (double v : {s.mean.fdr, s.mean.sensitivity, s.mean.type1, s.mean.f_score}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  std::ostringstream sa, sb, ra, rb;
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  write_replicates_csv(ra, a);
  write_replicates_csv(rb, b);
  CHECK(sa.str() == sb.str());
  CHECK(ra.str() == rb.str());
  CHECK(sa.str().rfind("method,lambda_signal,replicates_ok,replicates_failed,fdr,fdr_se,", 0) == 0);
}

TEST_CASE("draws archive round trip and corruption") {
  PosteriorDraws d;
  d.rows = 2;
  d.cols = 3;
  for (int k = 0; k < 24; ++k)
    d.lambda.push_back(0.25 * k);
  std::stringstream buf;
  write_draws(buf, d);
  const auto back = read_draws(buf);
  CHECK(back.n_draws() == 4);
  CHECK(back.lambda == d.lambda);

  const auto path = std::filesystem::temp_directory_path() / "dpsignal_archive_test.bin";
  save_draws(path, d);
  CHECK(load_draws(path).lambda == d.lambda);
  std::filesystem::remove(path);

  std::stringstream bad("NOTDRAWSxxxxxxxxxxxxxxxxxxxxxxxxxxx");
  try {
    read_draws(bad);
    FAIL("expected failure");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::validation);
  }

  std::string bytes = [&] {
    std::stringstream s;
    write_draws(s, d);
    return s.str();
  }();
  std::stringstream cut(bytes.substr(0, bytes.size() - 5));
  try {
    read_draws(cut);
    FAIL("expected failure");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::io);
  }
  CHECK_THROWS_AS(load_draws("/nonexistent/dir/x.bin"), Error);
}
