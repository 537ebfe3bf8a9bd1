#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "gtsr/config.hpp"

using namespace gtsr;
using Catch::Approx;

namespace {
const std::string kBase =
    "n=8192\nalpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\nvarsigma_x=2.5\ntrials=10\n";

bool fails_mentioning(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
  } catch (const std::invalid_argument& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}
}  // namespace

TEST_CASE("config parsing and defaults", "[harness]") {
  const ExperimentConfig cfg = parse_config(kBase);
  CHECK(cfg.n == 8192);
  CHECK(cfg.m() == 5734);  // round(0.7 * 8192)
  CHECK(cfg.alpha == 0.7);
  CHECK(cfg.sigma2() == Approx(1e-5).epsilon(1e-12));
  CHECK(cfg.quantized);
  CHECK(cfg.bits == 2);
  CHECK(cfg.delta == 0.5);  // default 2^{1-B}
  CHECK(cfg.rho == 0.4);
  CHECK(cfg.varsigma_x == 2.5);
  CHECK(cfg.trials == 10);
  CHECK(cfg.t_max == 50);
  CHECK(cfg.tol == 1e-8);
  CHECK(cfg.damping == 1.0);
  CHECK(cfg.base_seed == 0);

  SECTION("varsigma_x defaults to 1/rho") {
    const ExperimentConfig c =
        parse_config("n=1024\nalpha=0.5\nsnr_db=50\nbits=3\nrho=0.4\ntrials=1\n");
    CHECK(c.varsigma_x == Approx(2.5));
    CHECK(c.prior().signal_var() == Approx(1.0));
  }

  SECTION("comments, blanks, and whitespace are tolerated") {
    const ExperimentConfig c = parse_config(
        "# reference run\n\n  n = 1024 \nalpha=0.5\nsnr_db=50\nbits=3\nrho=0.4\n"
        "trials=1\n");
    CHECK(c.n == 1024);
  }

  SECTION("unquantized mode") {
    const ExperimentConfig c = parse_config(
        "n=1024\nalpha=0.5\nsnr_db=50\nbits=unquantized\nrho=0.4\ntrials=1\n");
    CHECK_FALSE(c.quantized);
    CHECK_THROWS_AS(c.qspec(), std::invalid_argument);
    CHECK(fails_mentioning(
        "n=1024\nalpha=0.5\nsnr_db=50\nbits=unquantized\ndelta=0.5\nrho=0.4\ntrials=1\n",
        "delta"));
  }

  SECTION("overrides replace file values") {
    const ExperimentConfig c = parse_config(kBase, {{"bits", "3"}, {"trials", "7"}});
    CHECK(c.bits == 3);
    CHECK(c.delta == 0.25);
    CHECK(c.trials == 7);
  }
}

TEST_CASE("config validation errors name the field", "[harness]") {
  CHECK(fails_mentioning("n=1000\nalpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\ntrials=1\n",
                         "n"));  // not a power of two
  CHECK(fails_mentioning("alpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\ntrials=1\n", "n"));
  CHECK(fails_mentioning("n=256\nalpha=0\nsnr_db=50\nbits=2\nrho=0.4\ntrials=1\n",
                         "alpha"));
  CHECK(fails_mentioning("n=256\nalpha=1.2\nsnr_db=50\nbits=2\nrho=0.4\ntrials=1\n",
                         "alpha"));
  CHECK(fails_mentioning("n=256\nalpha=0.7\nsnr_db=50\nbits=25\nrho=0.4\ntrials=1\n",
                         "bits"));
  CHECK(fails_mentioning("n=256\nalpha=0.7\nsnr_db=50\nbits=2\nrho=1.5\ntrials=1\n",
                         "rho"));
  CHECK(fails_mentioning("n=256\nalpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\ntrials=0\n",
                         "trials"));
  CHECK(fails_mentioning(kBase + "delta=-0.5\n", "delta"));
  CHECK(fails_mentioning(kBase + "damping=1.5\n", "damping"));
  CHECK(fails_mentioning(kBase + "tol=-1\n", "tol"));
  CHECK(fails_mentioning(kBase + "mystery=1\n", "mystery"));   // unknown key
  CHECK(fails_mentioning(kBase + "bits=3\n", "duplicate"));    // repeated key
  CHECK(fails_mentioning("n=256\nalpha=0.7\nsnr_db=abc\nbits=2\nrho=0.4\ntrials=1\n",
                         "snr_db"));
  CHECK(fails_mentioning("bogus line\n" + kBase, "line 1"));
}

TEST_CASE("config canonical form and hash", "[harness]") {
  const ExperimentConfig cfg = parse_config(kBase);

  SECTION("write/parse round trip preserves the hash") {
    const std::string text = write_config(cfg);
    const ExperimentConfig back = parse_config(text);
    CHECK(back.hash() == cfg.hash());
    CHECK(write_config(back) == text);
  }

  SECTION("hash is sensitive to every field") {
    const std::vector<std::pair<std::string, std::string>> tweaks = {
        {"n", "4096"},      {"alpha", "0.5"},  {"snr_db", "40"},
        {"bits", "3"},      {"delta", "0.3"},  {"rho", "0.3"},
        {"varsigma_x", "2"}, {"trials", "11"}, {"t_max", "9"},
        {"tol", "1e-6"},    {"damping", "0.9"}, {"base_seed", "5"}};
    for (const auto& kv : tweaks) {
      const ExperimentConfig other = parse_config(kBase, {kv});
      CHECK(other.hash() != cfg.hash());
    }
  }

  SECTION("insensitive to formatting") {
    const ExperimentConfig spaced = parse_config(
        "n = 8192\n# hi\nalpha=0.70\nsnr_db=50.0\nbits=2\nrho=0.4\nvarsigma_x=2.5\n"
        "trials=10\n");
    CHECK(spaced.hash() == cfg.hash());
  }
}
