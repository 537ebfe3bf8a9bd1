#pragma once

// Deterministic recursion predicting the per-iteration MSE of the turbo
// loop: the output-channel information integral theta, the input-prior
// mmse functional, and the two-line variance recursion coupling them.

#include <cmath>
#include <vector>

#include "gtsr/model.hpp"
#include "gtsr/normal.hpp"
#include "gtsr/quadrature.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct SeState {
  int t = 0;
  double v = 0.0;      // extrinsic variance fed to the output module
  double eta = 0.0;    // precision of the equivalent scalar channel
  double theta = 0.0;  // output-channel information integral
  double mse_pred = 0.0;
};

// theta(v) = (1/2) sum_{levels} int N(m; 0, (v_x-v)/2)
//                [psi'(cell; m, c2)]^2 / psi(cell; m, c2) dm,
// with c2 = (sigma2+v)/2.  The 1/2 folds the identical real and imaginary
// contributions into the complex-variance convention used throughout; it
// is fixed by the unquantized limit theta -> 1/(sigma2+v).
//
// The integrand is a row of spikes of width ~c centered at the cell
// edges, under a Gaussian envelope of width s = sqrt((v_x-v)/2); s and c
// differ by orders of magnitude across the recursion, so integration runs
// over merged windows around the finite cell edges with panels sized to
// min(c, s).
inline double theta(double v, double v_x, double sigma2, const QuantizerSpec& spec,
                    const QuadratureRule& q = QuadratureRule::default_rule()) {
  require_domain(v > 0.0 && sigma2 > 0.0, "theta: variances must be positive");
  require_domain(v <= v_x, "theta: message variance exceeds prior variance");
  const double s2 = (v_x - v) / 2.0, c2 = (sigma2 + v) / 2.0;
  const double s = std::sqrt(s2), c = std::sqrt(c2);

  // [psi'(cell; m, c2)]^2 / psi = mean^2 * prob / c2 of the standardized
  // truncated normal on the cell (psi' = -mean * prob / c).
  auto ginfo = [&](double low, double up, double m) {
    const TruncMoments tm = trunc_std_moments((low - m) / c, (up - m) / c);
    return tm.mean * tm.mean * tm.prob / c2;
  };

  const int L = spec.num_levels();
  double tot = 0.0;
  if (s == 0.0) {
    for (int k = 0; k < L; ++k) {
      const auto [low, up] = spec.thresholds_at(k);
      tot += ginfo(low, up, 0.0);
    }
    return 0.5 * tot;
  }

  const double W = 12.0;  // window half-width in units of c resp. s
  const double h = std::min(c, s) / (2.0 * q.refine);
  for (int k = 0; k < L; ++k) {
    const auto [low, up] = spec.thresholds_at(k);
    double win[2][2];
    int nw = 0;
    for (double e : {low, up}) {
      if (!std::isfinite(e)) continue;
      const double a = std::max(e - W * c, -W * s);
      const double b = std::min(e + W * c, W * s);
      if (a < b) {
        win[nw][0] = a;
        win[nw][1] = b;
        ++nw;
      }
    }
    if (nw == 2 && win[1][0] <= win[0][1]) {  // windows overlap: merge
      win[0][1] = win[1][1];
      nw = 1;
    }
    for (int wi = 0; wi < nw; ++wi) {
      const double a = win[wi][0], b = win[wi][1];
      const int npan = static_cast<int>(std::ceil((b - a) / h));
      tot += integrate_panels(q.panel, a, b, npan, [&](double m) {
        return norm_pdf(m / s) / s * ginfo(low, up, m);
      });
    }
  }
  return 0.5 * tot;
}

// Closed form of the same quantity for the unquantized Gaussian channel.
inline double theta_unquantized(double v, double sigma2) {
  require_domain(v > 0.0 && sigma2 > 0.0, "theta_unquantized: variances must be positive");
  return 1.0 / (sigma2 + v);
}

// mmse of estimating a Bernoulli-Gaussian scalar from an AWGN observation
// of precision eta:
//   mmse(eta) = rho vs - (rho vs)^2 eta/(K+1) * J,   K = eta vs,
//   J = int_0^inf e^{-t} t / (rho + (1-rho) e^{-tK} (K+1)) dt.
// The denominator has a boundary layer of width 1/K near
// t0 = ln((1-rho)(K+1)/rho)/K; panels sized to min(1/K, 1) resolve it and
// the remainder beyond T (where the layer term is < e^{-45}) integrates
// to e^{-T}(T+1)/rho analytically.
inline double mmse_bg(double eta, const BgPrior& prior,
                      const QuadratureRule& q = QuadratureRule::default_rule()) {
  require_domain(eta > 0.0, "mmse_bg: eta must be positive");
  const double rho = prior.rho, vs = prior.varsigma;
  const double K = eta * vs;
  if (rho >= 1.0) return vs / (1.0 + K);  // dense prior: plain Wiener mmse
  const double lnQ = std::log((1.0 - rho) * (K + 1.0) / rho);
  const double T = std::min((std::max(lnQ, 0.0) + 45.0) / K, 60.0);
  const int npan = static_cast<int>(std::ceil(T * std::max(K, 1.0) * 2.0 * q.refine));
  double J = integrate_panels(q.panel, 0.0, T, npan, [&](double t) {
    return std::exp(-t) * t / (rho + (1.0 - rho) * std::exp(-t * K) * (K + 1.0));
  });
  J += std::exp(-T) * (T + 1.0) / rho;  // tail, where the layer term is dead
  const double px = rho * vs;
  return px - px * px * eta / (K + 1.0) * J;
}

inline SeState se_step(const SeState& state, double alpha, const BgPrior& prior,
                       double sigma2, const QuantizerSpec* spec,
                       const QuadratureRule& q = QuadratureRule::default_rule()) {
  require_domain(alpha >= 0.0 && alpha <= 1.0, "se_step: alpha must lie in [0,1]");
  const double v_x = prior.signal_var();
  const double th = spec ? theta(state.v, v_x, sigma2, *spec, q)
                         : theta_unquantized(state.v, sigma2);
  const double at = alpha * th;
  if (!(at > 0.0) || !std::isfinite(at))
    throw diverged_error("se_step: alpha*theta not positive");
  const double inv = 1.0 / at - state.v;
  if (!(inv > 0.0)) throw diverged_error("se_step: extrinsic precision not positive");
  const double eta = 1.0 / inv;
  const double m = mmse_bg(eta, prior, q);
  const double d = 1.0 / m - eta;
  if (!(d > 0.0)) throw diverged_error("se_step: posterior precision not above eta");
  // mmse is Gaussian-extremal, so 1/m - eta >= 1/v_x and v stays in (0, v_x];
  // the min guards roundoff at the eta -> 0 end.
  const double v1 = std::min(clamp_var(1.0 / d), v_x);
  return {state.t + 1, v1, eta, th, m};
}

inline SeState se_init(const BgPrior& prior) {
  const double v_x = prior.signal_var();
  return {0, v_x, 0.0, 0.0, v_x};
}

struct SeTrajectory {
  std::vector<SeState> states;  // t = 1, 2, ...
  bool diverged = false;
};

inline SeTrajectory se_trajectory(double alpha, const BgPrior& prior, double sigma2,
                                  const QuantizerSpec* spec, int t_max, double tol,
                                  const QuadratureRule& q = QuadratureRule::default_rule()) {
  require(t_max >= 1, "se_trajectory: t_max must be >= 1");
  require(tol >= 0.0, "se_trajectory: tol must be non-negative");
  SeTrajectory out;
  SeState cur = se_init(prior);
  for (int t = 0; t < t_max; ++t) {
    SeState next;
    try {
      next = se_step(cur, alpha, prior, sigma2, spec, q);
    } catch (const diverged_error&) {
      out.diverged = true;
      return out;
    }
    out.states.push_back(next);
    const bool settled = std::abs(next.v - cur.v) / cur.v < tol;
    cur = next;
    if (settled) break;
  }
  return out;
}

}  // namespace gtsr
