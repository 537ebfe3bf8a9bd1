// gtsr command-line driver: simulate / se / compare / selftest.
//
// Exit codes: 0 success, 1 usage or config error, 2 comparison failure,
// 3 numerical divergence (SE trajectory diverged, or every simulation
// trial diverged).

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gtsr/gtsr.hpp"
#include "oracles.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> split_overrides(
    const std::vector<std::string>& kvs) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    out.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    gtsr::save_text(path, text);
}

// ---- selftest ----

struct SelfTest {
  int failures = 0;

  template <class Fn>
  void check(const char* name, Fn&& fn) {
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %s%s%s\n", ok ? " ok " : "FAIL", name, detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++failures;
  }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
bool rel_near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

int run_selftest() {
  using namespace gtsr;
  SelfTest st;

  st.check("dft matches direct oracle (n=64)", [](std::string& d) {
    Rng rng(7);
    cvec x(64);
    for (auto& c : x) c = rng.cnormal(1.0);
    const DftPlan plan(64);
    const cvec f = plan.forward(x), fo = gtsr_test::oracle_dft(x, false);
    const cvec a = plan.adjoint(x), ao = gtsr_test::oracle_dft(x, true);
    double err = 0.0;
    for (int i = 0; i < 64; ++i)
      err = std::max({err, std::abs(f[i] - fo[i]), std::abs(a[i] - ao[i])});
    d = "max abs err " + fmt_g17(err);
    return err <= 1e-12;
  });

  st.check("dft unitary round-trip (n=1024)", [](std::string& d) {
    Rng rng(11);
    cvec x(1024);
    for (auto& c : x) c = rng.cnormal(2.0);
    const DftPlan plan(1024);
    const cvec back = plan.adjoint(plan.forward(x));
    double err = 0.0;
    for (int i = 0; i < 1024; ++i) err = std::max(err, std::abs(back[i] - x[i]));
    d = "max abs err " + fmt_g17(err);
    return err <= 1e-12;
  });

  st.check("interval probability matches density quadrature", [](std::string& d) {
    Rng rng(3);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
      const double c2 = std::exp(rng.uniform() * 4.0 - 3.0);
      const double z = 3.0 * rng.normal();
      const double lo = z + (rng.uniform() * 6.0 - 4.0) * std::sqrt(c2);
      const double hi = lo + rng.uniform() * 4.0 * std::sqrt(c2);
      const double got = psi({lo, hi, z, c2});
      const double want = gtsr_test::oracle_psi(lo, hi, z, c2);
      worst = std::max(worst, std::abs(got - want));
    }
    d = "max abs err " + fmt_g17(worst);
    return worst <= 1e-10;
  });

  st.check("z denoiser matches quadrature oracle (200 draws)", [](std::string& d) {
    Rng rng(17);
    const int bits_pool[4] = {1, 2, 3, 8};
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const int bits = bits_pool[static_cast<int>(rng.below(4))];
      const QuantizerSpec qs = QuantizerSpec::uniform(bits, QuantizerSpec::default_step(bits));
      const double v = std::exp(std::log(1e-4) + rng.uniform() * std::log(1e5));
      const double s2 = std::exp(std::log(1e-6) + rng.uniform() * std::log(1e6));
      const cplx z0 = rng.cnormal(1.0);
      const cplx zp = z0 + rng.cnormal(v);
      const cplx y = z0 + rng.cnormal(s2);
      const double lr = qs.level(qs.index_of_value(y.real()));
      const double li = qs.level(qs.index_of_value(y.imag()));
      const ScalarPosterior got = z_posterior_scalar(zp, v, lr, li, qs, s2, true);
      const auto [lo_r, up_r] = thresholds(lr, qs);
      const auto [lo_i, up_i] = thresholds(li, qs);
      const auto or_ = gtsr_test::oracle_z_real(zp.real(), v / 2, s2 / 2, lo_r, up_r);
      const auto oi_ = gtsr_test::oracle_z_real(zp.imag(), v / 2, s2 / 2, lo_i, up_i);
      worst = std::max({worst, std::abs(got.mean.real() - or_.mean),
                        std::abs(got.mean.imag() - oi_.mean),
                        std::abs(got.var - (or_.var + oi_.var))});
    }
    d = "max abs err " + fmt_g17(worst);
    return worst <= 1e-6;
  });

  st.check("x denoiser matches quadrature oracle (200 draws)", [](std::string& d) {
    Rng rng(23);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double rho = 0.05 + 0.95 * rng.uniform();
      const double vs = std::exp(rng.uniform() * 3.0 - 1.0);
      const double v = std::exp(std::log(1e-4) + rng.uniform() * std::log(1e5));
      const BgPrior prior = BgPrior::make(rho, vs);
      const cplx x0 = rng.uniform() < rho ? rng.cnormal(vs) : cplx{0.0, 0.0};
      const cplx r = x0 + rng.cnormal(v);
      const ScalarPosterior got = x_posterior_scalar(r, v, prior);
      const auto want = gtsr_test::oracle_x(r, v, rho, vs);
      worst = std::max({worst, std::abs(got.mean - want.mean), std::abs(got.var - want.var)});
    }
    d = "max abs err " + fmt_g17(worst);
    return worst <= 1e-6;
  });

  st.check("mmse closed form at rho=1", [](std::string& d) {
    const BgPrior p = BgPrior::make(1.0, 2.5);
    const QuadratureRule q = QuadratureRule::default_rule();
    double worst = 0.0;
    for (double eta : {0.1, 1.0, 10.0, 100.0})
      worst = std::max(worst,
                       std::abs(mmse_bg(eta, p, q) - 2.5 / (1.0 + eta * 2.5)) );
    d = "max abs err " + fmt_g17(worst);
    return worst <= 1e-12;
  });

  st.check("theta one-bit closed form at v=v_x", [](std::string& d) {
    const QuantizerSpec qs = QuantizerSpec::uniform(1, 1.0);
    const double v_x = 1.0, s2 = 1e-5;
    const double got = theta(v_x, v_x, s2, qs, QuadratureRule::default_rule());
    const double want = 2.0 / (kPi * (s2 + v_x));
    d = "got " + fmt_g17(got);
    return rel_near(got, want, 1e-12);
  });

  st.check("theta matches adaptive integration (B=2)", [](std::string& d) {
    const QuantizerSpec qs = QuantizerSpec::uniform(2, 0.5);
    const double got = theta(0.4, 1.0, 1e-5, qs, QuadratureRule::default_rule());
    const double want = gtsr_test::oracle_theta(0.4, 1.0, 1e-5, qs);
    d = "rel err " + fmt_g17(std::abs(got - want) / want);
    return rel_near(got, want, 1e-8);
  });

  st.check("quadrature rules integrate exactly", [](std::string& d) {
    const GaussRule gh = gauss_hermite_prob(31);
    double sw = 0.0, sx2 = 0.0;
    for (int i = 0; i < gh.size(); ++i) {
      sw += gh.weights[i];
      sx2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
    }
    const GaussRule gl = gauss_legendre(12);
    double p7 = 0.0;  // \int_{-1}^{1} (x^7 + x^4 + 1) dx = 2/5 + 2
    for (int i = 0; i < gl.size(); ++i) {
      const double x = gl.nodes[i];
      p7 += gl.weights[i] * (std::pow(x, 7) + std::pow(x, 4) + 1.0);
    }
    const GaussRule lg = gauss_laguerre(24);
    double t1 = 0.0;  // \int_0^inf e^{-t} t dt = 1
    for (int i = 0; i < lg.size(); ++i) t1 += lg.weights[i] * lg.nodes[i];
    const double err = std::max({std::abs(sw - 1.0), std::abs(sx2 - 1.0),
                                 std::abs(p7 - 2.4), std::abs(t1 - 1.0)});
    d = "max abs err " + fmt_g17(err);
    return err <= 1e-12;
  });

  st.check("quadrature refinement stable to 1e-9", [](std::string& d) {
    const QuantizerSpec qs = QuantizerSpec::uniform(3, 0.25);
    const BgPrior p = BgPrior::make(0.4, 2.5);
    const QuadratureRule q1 = QuadratureRule::default_rule();
    QuadratureRule q2 = q1;
    q2.refine = 2.0;
    const double t1 = theta(0.3, 1.0, 1e-5, qs, q1), t2 = theta(0.3, 1.0, 1e-5, qs, q2);
    const double m1 = mmse_bg(3.0, p, q1), m2 = mmse_bg(3.0, p, q2);
    const double err = std::max(std::abs(t1 - t2) / t1, std::abs(m1 - m2) / m1);
    d = "max rel change " + fmt_g17(err);
    return err <= 1e-9;
  });

  st.check("state evolution runs and contracts", [](std::string& d) {
    const BgPrior p = BgPrior::make(0.4, 2.5);
    const SeTrajectory tr =
        se_trajectory(0.7, p, 1e-5, nullptr, 50, 1e-8, QuadratureRule::default_rule());
    bool mono = !tr.diverged && !tr.states.empty();
    for (std::size_t i = 1; i < tr.states.size(); ++i)
      mono = mono && tr.states[i].v <= tr.states[i - 1].v + 1e-15;
    d = "final mse_pred " + fmt_g17(tr.states.back().mse_pred);
    return mono && tr.states.back().mse_pred < 1e-4;
  });

  st.check("config parses, defaults, and hashes", [](std::string& d) {
    const ExperimentConfig cfg =
        parse_config("n=8192\nalpha=0.7\nsnr_db=50\nbits=3\nrho=0.4\nvarsigma_x=2.5\ntrials=4\n");
    const bool ok = cfg.m() == 5734 && cfg.qspec().step == 0.25 && cfg.t_max == 50 &&
                    cfg.hash() == parse_config(write_config(cfg)).hash();
    bool rejected = false;
    try {
      parse_config("n=1000\nalpha=0.7\nsnr_db=50\nbits=3\nrho=0.4\nvarsigma_x=2.5\ntrials=1\n");
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    d = "m=" + std::to_string(cfg.m());
    return ok && rejected;
  });

  st.check("csv round-trip is byte-identical", [](std::string& d) {
    ExperimentConfig cfg = parse_config(
        "n=64\nalpha=0.7\nsnr_db=50\nbits=2\nrho=0.4\nvarsigma_x=2.5\ntrials=2\nt_max=3\n");
    const SimTable sim = run_simulation(cfg);
    const SeTable se = run_se(cfg);
    const std::string s1 = write_csv(sim), s2 = write_csv(parse_sim_csv(s1));
    const std::string e1 = write_csv(se), e2 = write_csv(parse_se_csv(e1));
    d = std::to_string(s1.size()) + " bytes";
    return s1 == s2 && e1 == e2;
  });

  std::printf("%s (%d failure%s)\n", st.failures ? "SELFTEST FAILED" : "selftest passed",
              st.failures, st.failures == 1 ? "" : "s");
  return st.failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gtsr: quantized compressed sensing via turbo message passing"};
  app.require_subcommand(1);

  std::string cfg_path, out_path, sim_path, se_path;
  std::vector<std::string> sets;
  int threads = 1;
  double tol_db = 0.5;
  int t_check = 10;

  CLI::App* sim = app.add_subcommand("simulate", "run Monte-Carlo recovery trials");
  sim->add_option("config", cfg_path, "key=value config file")->required();
  sim->add_option("-o,--output", out_path, "output CSV path (default: stdout)");
  sim->add_option("--threads", threads, "trial-level worker threads")
      ->check(CLI::Range(1, 256));
  sim->add_option("--set", sets, "override config entries (key=value)");

  CLI::App* se = app.add_subcommand("se", "run the state-evolution predictor");
  se->add_option("config", cfg_path, "key=value config file")->required();
  se->add_option("-o,--output", out_path, "output CSV path (default: stdout)");
  se->add_option("--set", sets, "override config entries (key=value)");

  CLI::App* cmp = app.add_subcommand("compare", "compare simulation against prediction");
  cmp->add_option("sim", sim_path, "simulation CSV")->required();
  cmp->add_option("se", se_path, "state-evolution CSV")->required();
  cmp->add_option("--tol-db", tol_db, "max allowed |gap| in dB")->required();
  cmp->add_option("--t-check", t_check, "check iterations 1..k")->required();
  cmp->add_option("-o,--output", out_path, "report CSV path (default: stdout)");

  app.add_subcommand("selftest", "run the built-in oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const gtsr::ExperimentConfig cfg =
          gtsr::load_config_file(cfg_path, split_overrides(sets));
      const gtsr::SimTable table = gtsr::run_simulation(cfg, threads);
      emit(gtsr::write_csv(table), out_path);
      const std::size_t ndiv = gtsr::diverged_trials(table).size();
      if (ndiv == static_cast<std::size_t>(cfg.trials)) {
        std::cerr << "error: all " << cfg.trials << " trials diverged\n";
        return 3;
      }
      return 0;
    }
    if (se->parsed()) {
      const gtsr::ExperimentConfig cfg =
          gtsr::load_config_file(cfg_path, split_overrides(sets));
      const gtsr::SeTable table = gtsr::run_se(cfg);
      emit(gtsr::write_csv(table), out_path);
      if (gtsr::se_diverged(table)) {
        std::cerr << "error: state-evolution trajectory diverged\n";
        return 3;
      }
      return 0;
    }
    if (cmp->parsed()) {
      const gtsr::SimTable simt = gtsr::parse_sim_csv(gtsr::load_text(sim_path));
      const gtsr::SeTable set = gtsr::parse_se_csv(gtsr::load_text(se_path));
      const gtsr::ComparisonReport rep = gtsr::compare(simt, set, tol_db, t_check);
      emit(gtsr::write_csv(rep), out_path);
      return rep.pass ? 0 : 2;
    }
    return run_selftest();
  } catch (const gtsr::diverged_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
