#pragma once

// Problem model: Bernoulli-Gaussian signal prior, random row selection,
// additive complex noise, and the uniform mid-rise quantizer applied per
// real dimension of the observed transform-domain samples.

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "gtsr/normal.hpp"
#include "gtsr/rng.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct BgPrior {
  double rho;       // activity rate, in (0, 1]
  double varsigma;  // variance of an active entry

  static BgPrior make(double rho, double varsigma) {
    require_domain(rho > 0.0 && rho <= 1.0, "BgPrior: rho must lie in (0,1]");
    require_domain(varsigma > 0.0, "BgPrior: varsigma must be positive");
    return {rho, varsigma};
  }
  double signal_var() const { return rho * varsigma; }
};

struct NoiseModel {
  double sigma2;  // total complex noise variance per observed sample

  static NoiseModel from_sigma2(double s2) {
    require_domain(s2 > 0.0, "NoiseModel: sigma2 must be positive");
    return {s2};
  }
  // SNR defined against unit signal power: sigma2 = 10^(-snr_db/10).
  static NoiseModel from_snr_db(double snr_db) {
    return from_sigma2(std::pow(10.0, -snr_db / 10.0));
  }
};

class SelectionMask {
 public:
  static SelectionMask from_flags(std::vector<std::uint8_t> flags) {
    require(!flags.empty(), "SelectionMask: empty flag vector");
    SelectionMask mk;
    mk.flags_ = std::move(flags);
    for (auto f : mk.flags_) mk.m_ += (f != 0);
    return mk;
  }

  // Uniformly random m-subset of {0,...,n-1} via partial Fisher-Yates.
  static SelectionMask draw(std::size_t n, std::size_t m, Rng& rng) {
    require(n > 0 && m <= n, "SelectionMask: need 0 <= m <= n, n > 0");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::uint8_t> flags(n, 0);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
      flags[idx[i]] = 1;
    }
    return from_flags(std::move(flags));
  }

  static SelectionMask all(std::size_t n) {
    return from_flags(std::vector<std::uint8_t>(n, 1));
  }

  std::size_t n() const { return flags_.size(); }
  std::size_t m() const { return m_; }
  double alpha() const { return static_cast<double>(m_) / static_cast<double>(n()); }
  bool observed(std::size_t i) const { return flags_[i] != 0; }
  const std::vector<std::uint8_t>& flags() const { return flags_; }

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t m_ = 0;
};

// Uniform mid-rise quantizer with 2^bits levels spaced step apart,
// applied independently to real and imaginary parts.  Cell k is the
// half-open interval (l_k - step/2, l_k + step/2] with the two outermost
// cells extended to -inf / +inf.
struct QuantizerSpec {
  int bits;
  double step;

  static QuantizerSpec uniform(int bits, double step) {
    require_domain(bits >= 1 && bits <= 24, "QuantizerSpec: bits must lie in [1,24]");
    require_domain(step > 0.0, "QuantizerSpec: step must be positive");
    return {bits, step};
  }
  static double default_step(int bits) { return std::ldexp(1.0, 1 - bits); }

  int num_levels() const { return 1 << bits; }
  int half() const { return 1 << (bits - 1); }

  double level(int k) const {
    require(k >= 0 && k < num_levels(), "QuantizerSpec: level index out of range");
    return (static_cast<double>(k) - half() + 0.5) * step;
  }

  // Cell index of a real value; ties x = boundary fall into the lower cell
  // (cells are open below, closed above).
  int index_of_value(double x) const {
    const double k = std::ceil(x / step) + (half() - 1);
    if (k < 0.0) return 0;
    if (k > num_levels() - 1) return num_levels() - 1;
    return static_cast<int>(k);
  }

  double quantize_value(double x) const { return level(index_of_value(x)); }

  // Inverse of level(); rejects values that are not reconstruction levels.
  int index_of_level(double lv) const {
    const double k = std::round(lv / step - 0.5 + half());
    const int ki = static_cast<int>(k);
    require_domain(ki >= 0 && ki < num_levels() && level(ki) == lv,
                   "QuantizerSpec: value is not a reconstruction level");
    return ki;
  }

  // Decision thresholds (low, up] of cell k; the edge cells are unbounded.
  std::pair<double, double> thresholds_at(int k) const {
    const double lv = level(k);
    double low = lv - 0.5 * step, up = lv + 0.5 * step;
    if (k == 0) low = -kInf;
    if (k == num_levels() - 1) up = kInf;
    return {low, up};
  }

  double saturation_level() const { return (half() - 1) * step; }

  std::vector<double> levels() const {
    std::vector<double> out(num_levels());
    for (int k = 0; k < num_levels(); ++k) out[k] = level(k);
    return out;
  }
};

inline std::pair<double, double> thresholds(double level, const QuantizerSpec& spec) {
  return spec.thresholds_at(spec.index_of_level(level));
}

// Observed data handed to the recovery loop.  For quantized runs value[i]
// holds the pair of reconstruction levels (re + j im) of an observed
// sample; unobserved positions are zero-filled and flagged off.
struct Measurements {
  cvec value;
  std::vector<std::uint8_t> observed;
  bool quantized;
};

inline cvec sample_signal(const BgPrior& prior, std::size_t n, Rng& rng) {
  require(n > 0, "sample_signal: n must be positive");
  cvec x(n, cplx{0.0, 0.0});
  for (auto& xi : x)
    if (rng.uniform() < prior.rho) xi = rng.cnormal(prior.varsigma);
  return x;
}

template <class Plan>
cvec forward_measure(const cvec& x, const SelectionMask& mask,
                     const NoiseModel& noise, const Plan& plan, Rng& rng) {
  require(x.size() == mask.n() && x.size() == plan.size(),
          "forward_measure: size mismatch between signal, mask and plan");
  cvec z = plan.forward(x);
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = mask.observed(i) ? z[i] + rng.cnormal(noise.sigma2) : cplx{0.0, 0.0};
  return z;
}

inline Measurements quantize(const cvec& y, const QuantizerSpec& spec,
                             const SelectionMask& mask) {
  require(y.size() == mask.n(), "quantize: size mismatch between y and mask");
  Measurements out{cvec(y.size(), cplx{0.0, 0.0}), mask.flags(), true};
  for (std::size_t i = 0; i < y.size(); ++i)
    if (mask.observed(i))
      out.value[i] = {spec.quantize_value(y[i].real()),
                      spec.quantize_value(y[i].imag())};
  return out;
}

inline Measurements unquantized(const cvec& y, const SelectionMask& mask) {
  require(y.size() == mask.n(), "unquantized: size mismatch between y and mask");
  Measurements out{cvec(y.size(), cplx{0.0, 0.0}), mask.flags(), false};
  for (std::size_t i = 0; i < y.size(); ++i)
    if (mask.observed(i)) out.value[i] = y[i];
  return out;
}

}  // namespace gtsr
