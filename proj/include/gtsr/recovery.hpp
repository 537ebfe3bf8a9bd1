#pragma once

// The turbo iteration: alternate the transform-domain observation
// posterior (module A) and the componentwise prior posterior (module B),
// exchanging extrinsic Gaussian messages through the unitary DFT.

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gtsr/denoisers.hpp"
#include "gtsr/model.hpp"
#include "gtsr/transform.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct TurboOptions {
  int t_max = 50;
  double tol = 1e-8;     // relative change of v_A_pri that counts as converged
  double damping = 1.0;  // 1 = off; <1 blends new extrinsics with the previous
};

enum class StopReason { max_iter, converged, diverged };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iter: return "max_iter";
    case StopReason::converged: return "converged";
    default: return "diverged";
  }
}

struct IterTrace {
  int t;
  double v_a_pri, v_a_post, v_b_pri, v_b_post;
  double mse;  // NaN when no truth was supplied
};

struct RecoveryResult {
  cvec x_hat;
  std::vector<double> mse_per_iter;  // empty when no truth was supplied
  std::vector<IterTrace> trace;
  int iterations_run = 0;
  StopReason stop_reason = StopReason::max_iter;
};

namespace detail {

// Damped prior update: convex blend on means and on precisions.
inline void blend(GaussianMessage& target, const GaussianMessage& fresh, double beta) {
  if (beta >= 1.0) {
    target = fresh;
    return;
  }
  const double prec = beta / fresh.variance + (1.0 - beta) / target.variance;
  for (std::size_t i = 0; i < target.mean.size(); ++i)
    target.mean[i] = beta * fresh.mean[i] + (1.0 - beta) * target.mean[i];
  target.variance = clamp_var(1.0 / prec);
}

}  // namespace detail

inline RecoveryResult run(const Measurements& meas, const SelectionMask& mask,
                          const QuantizerSpec* qspec, const NoiseModel& noise,
                          const BgPrior& prior, const DftPlan& plan,
                          const TurboOptions& opt, const cvec* truth = nullptr) {
  const std::size_t n = plan.size();
  require(meas.value.size() == n && mask.n() == n, "run: dimension mismatch");
  require(meas.observed == mask.flags(), "run: measurements and mask disagree");
  require(!meas.quantized || qspec != nullptr, "run: quantized data needs a QuantizerSpec");
  require(truth == nullptr || truth->size() == n, "run: truth size mismatch");
  require(opt.t_max >= 1, "run: t_max must be >= 1");
  require(opt.damping > 0.0 && opt.damping <= 1.0, "run: damping must lie in (0,1]");
  require(opt.tol >= 0.0, "run: tol must be non-negative");

  // Cell thresholds per observed entry, fixed for the whole run.
  struct Cell {
    double lr, ur, li, ui;
  };
  std::vector<Cell> cells;
  if (meas.quantized) {
    cells.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      if (mask.observed(i)) {
        const auto [lr, ur] = thresholds(meas.value[i].real(), *qspec);
        const auto [li, ui] = thresholds(meas.value[i].imag(), *qspec);
        cells[i] = {lr, ur, li, ui};
      }
  }

  const double v_x = prior.signal_var();
  GaussianMessage za_pri{cvec(n, cplx{0.0, 0.0}), v_x};
  GaussianMessage xb_pri{cvec(n, cplx{0.0, 0.0}), v_x};

  RecoveryResult res;
  cvec z_post(n), x_post(n);
  int pinned_run = 0;

  for (int t = 1; t <= opt.t_max; ++t) {
    // Module A: observation posterior per transform-domain entry.
    double va_acc = 0.0;
    const double tau2 = za_pri.variance / 2.0, nu2 = noise.sigma2 / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask.observed(i)) {
        z_post[i] = za_pri.mean[i];
        va_acc += za_pri.variance;
      } else if (meas.quantized) {
        const auto re = detail::z_real_moments(za_pri.mean[i].real(), tau2, nu2,
                                               cells[i].lr, cells[i].ur);
        const auto im = detail::z_real_moments(za_pri.mean[i].imag(), tau2, nu2,
                                               cells[i].li, cells[i].ui);
        z_post[i] = {re.mean, im.mean};
        va_acc += re.var + im.var;
      } else {
        const auto p = z_posterior_unquantized(za_pri.mean[i], za_pri.variance,
                                               meas.value[i], noise.sigma2);
        z_post[i] = p.mean;
        va_acc += p.var;
      }
    }
    const double v_a_post = clamp_var(va_acc / static_cast<double>(n));

    GaussianMessage ext_a =
        extrinsic({std::move(z_post), v_a_post}, za_pri);
    z_post = std::move(ext_a.mean);              // reuse storage
    ext_a.mean = plan.adjoint(z_post);           // to the signal domain
    detail::blend(xb_pri, ext_a, t == 1 ? 1.0 : opt.damping);

    // Module B: componentwise prior posterior.
    double vb_acc = 0.0, err_acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = x_posterior_scalar(xb_pri.mean[i], xb_pri.variance, prior);
      x_post[i] = p.mean;
      vb_acc += p.var;
      if (truth) err_acc += std::norm((*truth)[i] - p.mean);
    }
    const double v_b_post = clamp_var(vb_acc / static_cast<double>(n));
    const double mse_t =
        truth ? err_acc / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();

    const double va_pri_old = za_pri.variance;
    GaussianMessage ext_b = extrinsic({x_post, v_b_post}, xb_pri);
    cvec ext_b_x = std::move(ext_b.mean);
    ext_b.mean = plan.forward(ext_b_x);          // back to the transform domain
    detail::blend(za_pri, ext_b, t == 1 ? 1.0 : opt.damping);

    res.trace.push_back({t, va_pri_old, v_a_post, xb_pri.variance, v_b_post, mse_t});
    if (truth) res.mse_per_iter.push_back(mse_t);
    res.iterations_run = t;

    const bool finite = std::isfinite(v_a_post) && std::isfinite(v_b_post) &&
                        std::isfinite(za_pri.variance) && std::isfinite(xb_pri.variance);
    const bool pinned = za_pri.variance <= kVarMin || za_pri.variance >= kVarMax ||
                        xb_pri.variance <= kVarMin || xb_pri.variance >= kVarMax;
    pinned_run = pinned ? pinned_run + 1 : 0;
    if (!finite || pinned_run >= 3) {
      res.stop_reason = StopReason::diverged;
      break;
    }
    if (std::abs(za_pri.variance - va_pri_old) / va_pri_old < opt.tol) {
      res.stop_reason = StopReason::converged;
      break;
    }
  }
  res.x_hat = std::move(x_post);
  return res;
}

}  // namespace gtsr
