#pragma once

// Experiment driver: seeded Monte-Carlo simulation, SE tables, CSV
// emission with embedded config hashes, and the sim-vs-prediction
// comparison report.  Tables are plain CSV behind a '#' header block and
// re-parse byte-identically.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gtsr/config.hpp"
#include "gtsr/recovery.hpp"
#include "gtsr/state_evolution.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct SimRow {
  int trial, iter;
  double mse;
};

struct SeRow {
  int iter;
  double v, eta, mse_pred;
};

struct CompareRow {
  int t;
  double mse_sim_mean, mse_sim_stderr, mse_pred, gap_db;
};

struct SimTable {
  std::vector<std::string> meta;  // '#' header lines, verbatim
  std::vector<SimRow> rows;
};

struct SeTable {
  std::vector<std::string> meta;
  std::vector<SeRow> rows;
};

struct ComparisonReport {
  std::vector<std::string> meta;
  std::vector<CompareRow> rows;
  double max_gap_db = 0.0;
  double converged_fraction = 0.0;
  double tol_db = 0.0;
  int t_check = 0;
  bool pass = false;
};

namespace detail {

inline std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::vector<std::string> meta_common(const char* kind, const ExperimentConfig& cfg) {
  std::vector<std::string> meta;
  meta.push_back(std::string("# gtsr ") + kind + " v1");
  meta.push_back("# config_hash=" + hash_hex(cfg.hash()));
  for (const auto& [k, v] : cfg.canonical_items()) meta.push_back("# " + k + "=" + v);
  return meta;
}

inline std::string meta_value(const std::vector<std::string>& meta, const std::string& key) {
  const std::string prefix = "# " + key + "=";
  for (const auto& line : meta)
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  throw std::invalid_argument("csv: missing '" + key + "' header line");
}

inline std::uint64_t meta_hash(const std::vector<std::string>& meta) {
  return std::stoull(meta_value(meta, "config_hash"), nullptr, 16);
}

inline std::vector<int> parse_id_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

inline std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i)
    s += (i ? "," : "") + std::to_string(ids[i]);
  return s;
}

// Splits text into '#' meta lines, one column-header line (which must
// match), and data lines handed to row_fn.
template <class RowFn>
std::vector<std::string> parse_csv(const std::string& text, const std::string& columns,
                                   RowFn&& row_fn) {
  std::vector<std::string> meta;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header_seen)
        throw std::invalid_argument("csv line " + std::to_string(lineno) +
                                    ": comment after column header");
      meta.push_back(line);
      continue;
    }
    if (!header_seen) {
      if (line != columns)
        throw std::invalid_argument("csv line " + std::to_string(lineno) +
                                    ": expected columns '" + columns + "', got '" + line + "'");
      header_seen = true;
      continue;
    }
    row_fn(line, lineno);
  }
  if (!header_seen) throw std::invalid_argument("csv: missing column header");
  return meta;
}

inline std::vector<std::string> split_fields(const std::string& line, std::size_t expect,
                                             int lineno) {
  std::vector<std::string> f;
  std::istringstream in(line);
  std::string tok;
  while (std::getline(in, tok, ',')) f.push_back(tok);
  if (f.size() != expect)
    throw std::invalid_argument("csv line " + std::to_string(lineno) + ": expected " +
                                std::to_string(expect) + " fields");
  return f;
}

}  // namespace detail

inline std::uint64_t table_hash(const SimTable& t) { return detail::meta_hash(t.meta); }
inline std::uint64_t table_hash(const SeTable& t) { return detail::meta_hash(t.meta); }

inline std::vector<int> diverged_trials(const SimTable& t) {
  return detail::parse_id_list(detail::meta_value(t.meta, "diverged_trials"));
}
inline std::vector<int> converged_trials(const SimTable& t) {
  return detail::parse_id_list(detail::meta_value(t.meta, "converged_trials"));
}

// ---- simulation ----

inline SimTable run_simulation(const ExperimentConfig& cfg, int threads = 1) {
  require(threads >= 1 && threads <= 256, "run_simulation: threads must lie in [1,256]");
  const DftPlan plan(cfg.n);
  const NoiseModel noise = NoiseModel::from_sigma2(cfg.sigma2());
  const BgPrior prior = cfg.prior();
  const QuantizerSpec qs = cfg.quantized ? cfg.qspec() : QuantizerSpec{1, 1.0};
  const TurboOptions opt{cfg.t_max, cfg.tol, cfg.damping};

  struct TrialOut {
    std::vector<double> mse;
    StopReason stop = StopReason::max_iter;
  };
  std::vector<TrialOut> out(cfg.trials);

  auto run_trial = [&](int idx) {
    Rng rng(cfg.base_seed + static_cast<std::uint64_t>(idx));
    const SelectionMask mask = SelectionMask::draw(cfg.n, cfg.m(), rng);
    const cvec x = sample_signal(prior, cfg.n, rng);
    const cvec y = forward_measure(x, mask, noise, plan, rng);
    const Measurements meas = cfg.quantized ? quantize(y, qs, mask) : unquantized(y, mask);
    RecoveryResult res = run(meas, mask, cfg.quantized ? &qs : nullptr, noise, prior,
                             plan, opt, &x);
    out[idx] = {std::move(res.mse_per_iter), res.stop_reason};
  };

  if (threads == 1 || cfg.trials == 1) {
    for (int i = 0; i < cfg.trials; ++i) run_trial(i);
  } else {
    const int nth = std::min(threads, cfg.trials);
    std::vector<std::thread> pool;
    pool.reserve(nth);
    for (int t = 0; t < nth; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < cfg.trials; i += nth) run_trial(i);
      });
    for (auto& th : pool) th.join();
  }

  SimTable table;
  table.meta = detail::meta_common("sim", cfg);
  std::vector<int> div, conv;
  for (int i = 0; i < cfg.trials; ++i) {
    if (out[i].stop == StopReason::diverged) div.push_back(i);
    if (out[i].stop == StopReason::converged) conv.push_back(i);
  }
  table.meta.push_back("# converged_trials=" + detail::join_ids(conv));
  table.meta.push_back("# diverged_trials=" + detail::join_ids(div));
  for (int i = 0; i < cfg.trials; ++i)
    for (std::size_t k = 0; k < out[i].mse.size(); ++k)
      table.rows.push_back({i, static_cast<int>(k) + 1, out[i].mse[k]});
  return table;
}

inline SeTable run_se(const ExperimentConfig& cfg) {
  const BgPrior prior = cfg.prior();
  const QuantizerSpec qs = cfg.quantized ? cfg.qspec() : QuantizerSpec{1, 1.0};
  const double alpha = static_cast<double>(cfg.m()) / static_cast<double>(cfg.n);
  const SeTrajectory tr = se_trajectory(alpha, prior, cfg.sigma2(),
                                        cfg.quantized ? &qs : nullptr, cfg.t_max, cfg.tol);
  SeTable table;
  table.meta = detail::meta_common("se", cfg);
  table.meta.push_back(std::string("# diverged=") + (tr.diverged ? "1" : "0"));
  for (const SeState& s : tr.states) table.rows.push_back({s.t, s.v, s.eta, s.mse_pred});
  return table;
}

inline bool se_diverged(const SeTable& t) {
  return detail::meta_value(t.meta, "diverged") == "1";
}

// ---- CSV serialization ----

inline std::string write_csv(const SimTable& t) {
  std::string s;
  for (const auto& m : t.meta) s += m + "\n";
  s += "trial,iter,mse\n";
  char buf[96];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", r.trial, r.iter, r.mse);
    s += buf;
  }
  return s;
}

inline std::string write_csv(const SeTable& t) {
  std::string s;
  for (const auto& m : t.meta) s += m + "\n";
  s += "iter,v,eta,mse_pred\n";
  char buf[140];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.iter, r.v, r.eta, r.mse_pred);
    s += buf;
  }
  return s;
}

inline std::string write_csv(const ComparisonReport& rep) {
  std::string s;
  for (const auto& m : rep.meta) s += m + "\n";
  s += "t,mse_sim_mean,mse_sim_stderr,mse_pred,gap_db\n";
  char buf[200];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.t, r.mse_sim_mean,
                  r.mse_sim_stderr, r.mse_pred, r.gap_db);
    s += buf;
  }
  return s;
}

namespace detail {
inline void check_kind(const std::vector<std::string>& meta, const char* kind) {
  const std::string magic = std::string("# gtsr ") + kind + " v1";
  if (meta.empty() || meta.front() != magic)
    throw std::invalid_argument("csv: not a " + std::string(kind) + " table (missing '" +
                                magic + "')");
  meta_hash(meta);  // hash line must be present and well-formed
}
}  // namespace detail

inline SimTable parse_sim_csv(const std::string& text) {
  SimTable t;
  t.meta = detail::parse_csv(text, "trial,iter,mse", [&](const std::string& line, int no) {
    const auto f = detail::split_fields(line, 3, no);
    t.rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2])});
  });
  detail::check_kind(t.meta, "sim");
  return t;
}

inline SeTable parse_se_csv(const std::string& text) {
  SeTable t;
  t.meta = detail::parse_csv(text, "iter,v,eta,mse_pred", [&](const std::string& line, int no) {
    const auto f = detail::split_fields(line, 4, no);
    t.rows.push_back({std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
  });
  detail::check_kind(t.meta, "se");
  return t;
}

inline ComparisonReport parse_compare_csv(const std::string& text) {
  ComparisonReport rep;
  rep.meta = detail::parse_csv(text, "t,mse_sim_mean,mse_sim_stderr,mse_pred,gap_db",
                               [&](const std::string& line, int no) {
                                 const auto f = detail::split_fields(line, 5, no);
                                 rep.rows.push_back({std::stoi(f[0]), std::stod(f[1]),
                                                     std::stod(f[2]), std::stod(f[3]),
                                                     std::stod(f[4])});
                               });
  detail::check_kind(rep.meta, "compare");
  rep.max_gap_db = std::stod(detail::meta_value(rep.meta, "max_gap_db"));
  rep.converged_fraction = std::stod(detail::meta_value(rep.meta, "converged_fraction"));
  rep.tol_db = std::stod(detail::meta_value(rep.meta, "tol_db"));
  rep.t_check = std::stoi(detail::meta_value(rep.meta, "t_check"));
  rep.pass = detail::meta_value(rep.meta, "pass") == "1";
  return rep;
}

// ---- comparison ----

inline ComparisonReport compare(const SimTable& sim, const SeTable& se, double tol_db,
                                int t_check) {
  require(tol_db > 0.0, "compare: tol_db must be positive");
  require(t_check >= 1, "compare: t_check must be >= 1");
  if (table_hash(sim) != table_hash(se))
    throw std::invalid_argument("compare: config hashes differ between tables");

  const std::vector<int> div = diverged_trials(sim);
  std::map<int, std::vector<double>> series;  // trial -> mse by iter (1-based order)
  for (const auto& r : sim.rows) {
    if (std::find(div.begin(), div.end(), r.trial) != div.end()) continue;
    auto& v = series[r.trial];
    if (r.iter != static_cast<int>(v.size()) + 1)
      throw std::invalid_argument("compare: non-contiguous iterations for trial " +
                                  std::to_string(r.trial));
    v.push_back(r.mse);
  }
  if (series.empty()) throw std::invalid_argument("compare: no usable trials in sim table");

  int sim_t_max = 0;
  for (const auto& [id, v] : series)
    sim_t_max = std::max(sim_t_max, static_cast<int>(v.size()));
  const int t_end = std::min<int>(sim_t_max, static_cast<int>(se.rows.size()));
  if (t_end < 1) throw std::invalid_argument("compare: empty iteration overlap");

  ComparisonReport rep;
  rep.tol_db = tol_db;
  rep.t_check = t_check;
  const int ntr = static_cast<int>(series.size());
  for (int t = 1; t <= t_end; ++t) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto& [id, v] : series) {
      // converged trials hold their final value
      const double m = v[std::min<std::size_t>(t - 1, v.size() - 1)];
      sum += m;
      sum2 += m * m;
    }
    const double mean = sum / ntr;
    const double var = ntr > 1 ? std::max(0.0, (sum2 - ntr * mean * mean) / (ntr - 1)) : 0.0;
    const double stderr_ = std::sqrt(var / ntr);
    const SeRow& p = se.rows[t - 1];
    if (p.iter != t) throw std::invalid_argument("compare: se table iterations not contiguous");
    const double gap = 10.0 * std::log10(mean / p.mse_pred);
    rep.rows.push_back({t, mean, stderr_, p.mse_pred, gap});
  }

  double mg = 0.0;
  for (const auto& r : rep.rows)
    if (r.t <= t_check) mg = std::max(mg, std::abs(r.gap_db));
  rep.max_gap_db = mg;
  rep.pass = mg <= tol_db;

  int total_trials = 0;
  {
    std::vector<int> seen;
    for (const auto& r : sim.rows)
      if (std::find(seen.begin(), seen.end(), r.trial) == seen.end()) seen.push_back(r.trial);
    total_trials = static_cast<int>(seen.size());
  }
  const int conv = static_cast<int>(converged_trials(sim).size());
  rep.converged_fraction = total_trials ? static_cast<double>(conv) / total_trials : 0.0;

  rep.meta.push_back("# gtsr compare v1");
  rep.meta.push_back("# config_hash=" + detail::hash_hex(table_hash(sim)));
  rep.meta.push_back("# tol_db=" + fmt_g17(tol_db));
  rep.meta.push_back("# t_check=" + std::to_string(t_check));
  rep.meta.push_back("# max_gap_db=" + fmt_g17(rep.max_gap_db));
  rep.meta.push_back("# converged_fraction=" + fmt_g17(rep.converged_fraction));
  rep.meta.push_back(std::string("# pass=") + (rep.pass ? "1" : "0"));
  return rep;
}

// ---- file helpers ----

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::invalid_argument("write failed: " + path);
}

inline std::string load_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace gtsr
