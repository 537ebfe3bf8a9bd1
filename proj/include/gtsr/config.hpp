#pragma once

// Experiment configuration: flat key=value text, strict validation with
// field-level diagnostics, canonical echo and an FNV-1a hash of the echo
// embedded in every output table so mismatched artifacts are detectable.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gtsr/model.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct ExperimentConfig {
  std::size_t n = 0;
  double alpha = 0.0;
  double snr_db = 0.0;
  bool quantized = true;
  int bits = 0;        // valid when quantized
  double delta = 0.0;  // valid when quantized
  double rho = 0.0;
  double varsigma_x = 0.0;
  int trials = 0;
  int t_max = 50;
  double tol = 1e-8;
  double damping = 1.0;
  std::uint64_t base_seed = 0;

  std::size_t m() const {
    return static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
  }
  double sigma2() const { return std::pow(10.0, -snr_db / 10.0); }
  BgPrior prior() const { return BgPrior::make(rho, varsigma_x); }
  QuantizerSpec qspec() const {
    require(quantized, "qspec: config is unquantized");
    return QuantizerSpec::uniform(bits, delta);
  }

  std::vector<std::pair<std::string, std::string>> canonical_items() const {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("n", std::to_string(n));
    kv.emplace_back("alpha", fmt_g17(alpha));
    kv.emplace_back("snr_db", fmt_g17(snr_db));
    kv.emplace_back("bits", quantized ? std::to_string(bits) : std::string("unquantized"));
    if (quantized) kv.emplace_back("delta", fmt_g17(delta));
    kv.emplace_back("rho", fmt_g17(rho));
    kv.emplace_back("varsigma_x", fmt_g17(varsigma_x));
    kv.emplace_back("trials", std::to_string(trials));
    kv.emplace_back("t_max", std::to_string(t_max));
    kv.emplace_back("tol", fmt_g17(tol));
    kv.emplace_back("damping", fmt_g17(damping));
    kv.emplace_back("base_seed", std::to_string(base_seed));
    return kv;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : canonical_items())
      for (char c : k + "=" + v + "\n") {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
      }
    return h;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct KvEntry {
  std::string value;
  int line;
};

inline double parse_double(const std::string& key, const KvEntry& e) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(e.value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != e.value.size())
    throw std::invalid_argument("config line " + std::to_string(e.line) + ": key '" +
                                key + "': not a number: '" + e.value + "'");
  return x;
}

inline long long parse_int(const std::string& key, const KvEntry& e) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(e.value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != e.value.size())
    throw std::invalid_argument("config line " + std::to_string(e.line) + ": key '" +
                                key + "': not an integer: '" + e.value + "'");
  return x;
}

}  // namespace detail

// Parses key=value text plus optional override pairs (e.g. from CLI
// flags, applied last).  Unknown keys, duplicates, malformed values and
// range violations all fail with the offending key named.
inline ExperimentConfig parse_config(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  static const char* known[] = {"n",     "alpha",      "snr_db", "bits",
                                "delta", "rho",        "varsigma_x", "trials",
                                "t_max", "tol",        "damping", "base_seed"};
  std::map<std::string, detail::KvEntry> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value, got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    if (val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key '" + key + "': empty value");
    if (!kv.emplace(key, detail::KvEntry{val, lineno}).second)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
  }
  for (const auto& [key, val] : overrides) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("config override: unknown key '" + key + "'");
    kv[key] = detail::KvEntry{val, 0};
  }

  auto need = [&](const char* key) -> const detail::KvEntry& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument(std::string("config: missing required key '") + key + "'");
    return it->second;
  };
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: key '" + key + "': " + why);
  };

  ExperimentConfig cfg;
  {
    const long long nn = detail::parse_int("n", need("n"));
    if (nn < 1 || (nn & (nn - 1)) != 0) fail("n", "must be a positive power of two");
    cfg.n = static_cast<std::size_t>(nn);
  }
  cfg.alpha = detail::parse_double("alpha", need("alpha"));
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) fail("alpha", "must lie in (0,1]");
  cfg.snr_db = detail::parse_double("snr_db", need("snr_db"));
  if (!std::isfinite(cfg.snr_db)) fail("snr_db", "must be finite");
  {
    const auto& e = need("bits");
    if (e.value == "unquantized") {
      cfg.quantized = false;
      if (kv.count("delta")) fail("delta", "not allowed with bits=unquantized");
    } else {
      const long long b = detail::parse_int("bits", e);
      if (b < 1 || b > 24) fail("bits", "must lie in [1,24] or be 'unquantized'");
      cfg.quantized = true;
      cfg.bits = static_cast<int>(b);
      cfg.delta = kv.count("delta") ? detail::parse_double("delta", kv.at("delta"))
                                    : QuantizerSpec::default_step(cfg.bits);
      if (!(cfg.delta > 0.0) || !std::isfinite(cfg.delta)) fail("delta", "must be positive");
    }
  }
  cfg.rho = detail::parse_double("rho", need("rho"));
  if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) fail("rho", "must lie in (0,1]");
  cfg.varsigma_x = kv.count("varsigma_x")
                       ? detail::parse_double("varsigma_x", kv.at("varsigma_x"))
                       : 1.0 / cfg.rho;
  if (!(cfg.varsigma_x > 0.0) || !std::isfinite(cfg.varsigma_x))
    fail("varsigma_x", "must be positive");
  {
    const long long tr = detail::parse_int("trials", need("trials"));
    if (tr < 1 || tr > 1000000) fail("trials", "must lie in [1, 1e6]");
    cfg.trials = static_cast<int>(tr);
  }
  if (kv.count("t_max")) {
    const long long tm = detail::parse_int("t_max", kv.at("t_max"));
    if (tm < 1 || tm > 100000) fail("t_max", "must lie in [1, 1e5]");
    cfg.t_max = static_cast<int>(tm);
  }
  if (kv.count("tol")) {
    cfg.tol = detail::parse_double("tol", kv.at("tol"));
    if (!(cfg.tol >= 0.0) || !std::isfinite(cfg.tol)) fail("tol", "must be >= 0");
  }
  if (kv.count("damping")) {
    cfg.damping = detail::parse_double("damping", kv.at("damping"));
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) fail("damping", "must lie in (0,1]");
  }
  if (kv.count("base_seed")) {
    const long long s = detail::parse_int("base_seed", kv.at("base_seed"));
    if (s < 0) fail("base_seed", "must be non-negative");
    cfg.base_seed = static_cast<std::uint64_t>(s);
  }
  if (cfg.m() < 1) fail("alpha", "round(alpha*n) must be at least 1");
  return cfg;
}

// Canonical key=value text; parse_config(write_config(c)) reproduces c.
inline std::string write_config(const ExperimentConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg.canonical_items()) s += k + "=" + v + "\n";
  return s;
}

inline ExperimentConfig load_config_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace gtsr
