#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "gtsr/harness.hpp"

using namespace gtsr;
using Catch::Approx;

namespace {
ExperimentConfig small_cfg(const std::string& extra = "") {
  return parse_config(
      "n=256\nalpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\nvarsigma_x=2.5\ntrials=3\n"
      "t_max=6\ntol=0\n" +
      extra);
}

double db(double x) { return 10.0 * std::log10(x); }
}  // namespace

TEST_CASE("simulation tables", "[harness]") {
  const ExperimentConfig cfg = small_cfg();
  const SimTable t = run_simulation(cfg);

  SECTION("shape and metadata") {
    REQUIRE(t.rows.size() == 3 * 6);
    CHECK(t.meta.front() == "# gtsr sim v1");
    CHECK(table_hash(t) == cfg.hash());
    CHECK(diverged_trials(t).empty());
    int expect_trial = 0, expect_iter = 1;
    for (const SimRow& r : t.rows) {
      CHECK(r.trial == expect_trial);
      CHECK(r.iter == expect_iter);
      CHECK(r.mse > 0.0);
      if (++expect_iter > 6) {
        expect_iter = 1;
        ++expect_trial;
      }
    }
  }

  SECTION("rerun is byte-identical") {
    const SimTable t2 = run_simulation(cfg);
    CHECK(write_csv(t) == write_csv(t2));
  }

  SECTION("threaded run is byte-identical to serial") {
    const SimTable t3 = run_simulation(cfg, 3);
    CHECK(write_csv(t) == write_csv(t3));
  }

  SECTION("base_seed changes the data") {
    const SimTable other = run_simulation(small_cfg("base_seed=9\n"));
    CHECK(other.rows[0].mse != t.rows[0].mse);
  }

  SECTION("csv round trip") {
    const std::string text = write_csv(t);
    CHECK(write_csv(parse_sim_csv(text)) == text);
  }
}

TEST_CASE("state-evolution tables", "[harness]") {
  const ExperimentConfig cfg = small_cfg();
  const SeTable t = run_se(cfg);

  SECTION("shape and metadata") {
    REQUIRE(t.rows.size() == 6);  // tol=0 runs to t_max
    CHECK(t.meta.front() == "# gtsr se v1");
    CHECK(table_hash(t) == cfg.hash());
    CHECK_FALSE(se_diverged(t));
    for (int i = 0; i < 6; ++i) {
      CHECK(t.rows[i].iter == i + 1);
      CHECK(t.rows[i].mse_pred > 0.0);
      CHECK(t.rows[i].v > 0.0);
    }
  }

  SECTION("identical config gives identical output") {
    CHECK(write_csv(run_se(cfg)) == write_csv(t));
  }

  SECTION("csv round trip") {
    const std::string text = write_csv(t);
    CHECK(write_csv(parse_se_csv(text)) == text);
  }

  SECTION("fixed points ordered across bit depths") {
    double prev = 1e9;
    for (int bits : {1, 2, 3}) {
      const ExperimentConfig c = parse_config(
          "n=256\nalpha=0.7\nsnr_db=50\nbits=" + std::to_string(bits) +
          "\nrho=0.4\nvarsigma_x=2.5\ntrials=1\nt_max=100\n");
      const SeTable s = run_se(c);
      REQUIRE_FALSE(se_diverged(s));
      const double fp = s.rows.back().mse_pred;
      CHECK(fp < prev);
      prev = fp;
    }
  }

  SECTION("full observation without quantization reaches the noise floor") {
    const ExperimentConfig c = parse_config(
        "n=256\nalpha=1\nsnr_db=50\nbits=unquantized\nrho=0.4\nvarsigma_x=2.5\n"
        "trials=1\nt_max=60\n");
    const SeTable s = run_se(c);
    REQUIRE_FALSE(se_diverged(s));
    const double fp = s.rows.back().mse_pred;
    CHECK(fp < 10.0 * c.sigma2());
    CHECK(fp > c.sigma2() / 10.0);
  }
}

TEST_CASE("comparison reports", "[harness]") {
  const ExperimentConfig cfg = small_cfg();
  const SimTable sim = run_simulation(cfg);
  const SeTable se = run_se(cfg);

  SECTION("identical series give zero gaps") {
    SimTable synth = sim;
    synth.rows.clear();
    for (int trial = 0; trial < 2; ++trial)
      for (const SeRow& r : se.rows) synth.rows.push_back({trial, r.iter, r.mse_pred});
    const ComparisonReport rep = compare(synth, se, 0.5, 6);
    CHECK(rep.pass);
    CHECK(rep.max_gap_db == 0.0);
    REQUIRE(rep.rows.size() == 6);
    for (const CompareRow& r : rep.rows) {
      CHECK(r.gap_db == 0.0);
      CHECK(r.mse_sim_stderr == 0.0);
    }
  }

  SECTION("real small-n comparison is within a loose tolerance") {
    const ComparisonReport rep = compare(sim, se, 6.0, 4);
    CHECK(rep.max_gap_db < 6.0);
    CHECK(rep.pass);
    CHECK(rep.tol_db == 6.0);
    CHECK(rep.t_check == 4);
  }

  SECTION("failing tolerance flags and exits through pass=false") {
    const ComparisonReport rep = compare(sim, se, 1e-9, 4);
    CHECK_FALSE(rep.pass);
    const std::string text = write_csv(rep);
    const ComparisonReport back = parse_compare_csv(text);
    CHECK_FALSE(back.pass);
    CHECK(back.max_gap_db == rep.max_gap_db);
    CHECK(back.tol_db == rep.tol_db);
    CHECK(write_csv(back) == text);
  }

  SECTION("mismatched config hashes are rejected") {
    const SeTable other = run_se(small_cfg("base_seed=1\n"));
    CHECK_THROWS_AS(compare(sim, other, 0.5, 4), std::invalid_argument);
  }

  SECTION("gap definition") {
    const ComparisonReport rep = compare(sim, se, 50.0, 6);
    for (const CompareRow& r : rep.rows)
      CHECK(r.gap_db == Approx(db(r.mse_sim_mean / r.mse_pred)).margin(1e-12));
  }

  SECTION("diverged trials are excluded and reported") {
    SimTable marked = sim;
    // pretend trial 1 diverged: poison its rows and flag it
    for (SimRow& r : marked.rows)
      if (r.trial == 1) r.mse = 1e9;
    for (std::string& m : marked.meta)
      if (m.rfind("# diverged_trials=", 0) == 0) m = "# diverged_trials=1";
    const ComparisonReport rep = compare(marked, se, 6.0, 4);
    CHECK(rep.pass);  // the poisoned trial does not pollute the mean
    const ComparisonReport all = compare(sim, se, 6.0, 4);
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
      CHECK(rep.rows[i].mse_sim_mean != all.rows[i].mse_sim_mean);
  }

  SECTION("short converged series carry their final value forward") {
    SimTable padded = sim;
    padded.rows.clear();
    // trial 0 stops after iteration 2; trials at full length
    padded.rows.push_back({0, 1, 0.5});
    padded.rows.push_back({0, 2, 0.25});
    for (const SeRow& r : se.rows) padded.rows.push_back({1, r.iter, r.mse_pred});
    const ComparisonReport rep = compare(padded, se, 50.0, 6);
    REQUIRE(rep.rows.size() == 6);
    CHECK(rep.rows[3].mse_sim_mean == Approx(0.5 * (0.25 + se.rows[3].mse_pred)));
    CHECK(rep.rows[5].mse_sim_mean == Approx(0.5 * (0.25 + se.rows[5].mse_pred)));
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(compare(sim, se, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(compare(sim, se, 0.5, 0), std::invalid_argument);
    SeTable empty = se;
    empty.rows.clear();
    CHECK_THROWS_AS(compare(sim, empty, 0.5, 4), std::invalid_argument);
  }
}

TEST_CASE("csv parsing rejects malformed input", "[harness]") {
  const ExperimentConfig cfg = small_cfg();
  const std::string good = write_csv(run_se(cfg));

  CHECK_THROWS_AS(parse_se_csv("iter,v,eta,mse_pred\n1,0.5,1,0.5\n"),
                  std::invalid_argument);  // missing meta block
  CHECK_THROWS_AS(parse_sim_csv(good), std::invalid_argument);  // wrong kind
  CHECK_THROWS_AS(parse_se_csv("# gtsr se v1\n# config_hash=zz\niter,v,eta,mse_pred\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_se_csv("# gtsr se v1\niter,v,eta,mse_pred\n"),
                  std::invalid_argument);  // no hash line

  std::string bad_cols = good;
  const auto pos = bad_cols.find("iter,v,eta,mse_pred");
  bad_cols.replace(pos, 4, "step");
  CHECK_THROWS_AS(parse_se_csv(bad_cols), std::invalid_argument);

  std::string short_row = good;
  short_row += "7,0.5\n";
  CHECK_THROWS_AS(parse_se_csv(short_row), std::invalid_argument);
}

TEST_CASE("quantization becomes negligible at high depth", "[harness]") {
  // 12-bit vs unquantized, paired by seed so trial noise cancels
  const std::string common =
      "n=1024\nalpha=0.7\nsnr_db=50\nrho=0.4\nvarsigma_x=2.5\ntrials=8\nt_max=30\n"
      "tol=0\n";
  const ExperimentConfig cq =
      parse_config(common + "bits=12\ndelta=" + fmt_g17(std::ldexp(1.0, -10)) + "\n");
  const ExperimentConfig cu = parse_config(common + "bits=unquantized\n");
  const SimTable tq = run_simulation(cq);
  const SimTable tu = run_simulation(cu);

  auto final_mean = [](const SimTable& t) {
    double acc = 0.0;
    int cnt = 0;
    for (const SimRow& r : t.rows)
      if (r.iter == 30) {
        acc += r.mse;
        ++cnt;
      }
    return acc / cnt;
  };
  CHECK(std::abs(db(final_mean(tq)) - db(final_mean(tu))) <= 0.2);
}
