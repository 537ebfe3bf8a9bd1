#pragma once

// Scalar posterior computations used by both halves of the turbo loop:
// the componentwise MMSE denoiser under the Bernoulli-Gaussian prior and
// the quantized-observation posterior on the transform-domain samples,
// evaluated per real dimension with variances split evenly.

#include <cmath>

#include "gtsr/model.hpp"
#include "gtsr/normal.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct GaussianMessage {
  cvec mean;
  double variance;  // shared scalar, total complex variance
};

struct ScalarPosterior {
  cplx mean;
  double var;  // total complex variance
};

// Probability that a N(z, c2) real sample lands in (low, up].
struct PsiArgs {
  double low, up;  // cell thresholds, possibly infinite
  double z;        // mean of the underlying Gaussian
  double c2;       // its variance, > 0
};

inline double psi(const PsiArgs& p) {
  require_domain(p.c2 > 0.0, "psi: variance must be positive");
  require_domain(p.low < p.up, "psi: empty interval");
  if (std::isinf(p.low) && std::isinf(p.up)) return 1.0;
  const double c = std::sqrt(p.c2);
  return trunc_std_moments((p.low - p.z) / c, (p.up - p.z) / c).prob;
}

// d psi / dz = (phi((low-z)/c) - phi((up-z)/c)) / c.
inline double psi_prime(const PsiArgs& p) {
  require_domain(p.c2 > 0.0, "psi_prime: variance must be positive");
  require_domain(p.low < p.up, "psi_prime: empty interval");
  const double c = std::sqrt(p.c2);
  const double a = std::isinf(p.low) ? -kInf : (p.low - p.z) / c;
  const double b = std::isinf(p.up) ? kInf : (p.up - p.z) / c;
  if (std::isinf(a) || std::isinf(b)) return (norm_pdf(a) - norm_pdf(b)) / c;
  return detail::pdf_diff(a, b) / c;
}

namespace detail {

// Posterior mean/variance of one real dimension z ~ N(zp, tau2) given the
// noisy sample z + N(0, nu2) fell in the cell (low, up].
struct RealPosterior {
  double mean, var;
};

inline RealPosterior z_real_moments(double zp, double tau2, double nu2,
                                    double low, double up) {
  const double sy2 = tau2 + nu2;
  const double sy = std::sqrt(sy2);
  const TruncMoments tm =
      trunc_std_moments((low - zp) / sy, (up - zp) / sy);
  RealPosterior out;
  out.mean = zp + (tau2 / sy) * tm.mean;
  out.var = tau2 * (1.0 - (tau2 / sy2) * (1.0 - tm.var));
  return out;
}

}  // namespace detail

// Posterior on a transform-domain sample given its quantized observation.
// level_r/level_i are the observed reconstruction levels; real and
// imaginary parts each see prior variance v_pri/2 and noise sigma2/2.
// Unobserved samples pass the prior through unchanged.
inline ScalarPosterior z_posterior_scalar(cplx z_pri, double v_pri, double level_r,
                                          double level_i, const QuantizerSpec& spec,
                                          double sigma2, bool observed) {
  require_domain(v_pri > 0.0, "z_posterior_scalar: prior variance must be positive");
  if (!observed) return {z_pri, v_pri};
  require_domain(sigma2 > 0.0, "z_posterior_scalar: noise variance must be positive");
  const double tau2 = v_pri / 2.0, nu2 = sigma2 / 2.0;
  const auto [lr, ur] = thresholds(level_r, spec);
  const auto [li, ui] = thresholds(level_i, spec);
  const auto re = detail::z_real_moments(z_pri.real(), tau2, nu2, lr, ur);
  const auto im = detail::z_real_moments(z_pri.imag(), tau2, nu2, li, ui);
  return {{re.mean, im.mean}, re.var + im.var};
}

// Linear (Wiener) posterior for the unquantized observation y = z + noise.
inline ScalarPosterior z_posterior_unquantized(cplx z_pri, double v_pri, cplx y,
                                               double sigma2) {
  require_domain(v_pri > 0.0, "z_posterior_unquantized: prior variance must be positive");
  require_domain(sigma2 > 0.0, "z_posterior_unquantized: noise variance must be positive");
  const double g = v_pri / (v_pri + sigma2);
  return {z_pri + g * (y - z_pri), g * sigma2};
}

// Spike-and-slab posterior for x ~ rho CN(0, varsigma) + (1-rho) delta_0
// observed through r = x + CN(0, v).
inline ScalarPosterior x_posterior_scalar(cplx r, double v, const BgPrior& prior) {
  require_domain(v > 0.0, "x_posterior_scalar: message variance must be positive");
  const double vs = prior.varsigma, rho = prior.rho;
  // log-likelihood ratio of active vs inactive component
  const double g =
      std::norm(r) * (1.0 / v - 1.0 / (vs + v)) - std::log1p(vs / v);
  double p1 = 1.0;
  if (rho < 1.0)
    p1 = rho / (rho + (1.0 - rho) * std::exp(std::min(-g, 700.0)));
  const cplx m = (vs / (vs + v)) * r;
  const double v1 = vs * v / (vs + v);
  return {p1 * m, p1 * v1 + p1 * (1.0 - p1) * std::norm(m)};
}

// Gaussian message division: removes pri from post.  Non-informative or
// inconsistent posteriors clamp to the variance ceiling instead of
// producing a negative precision.
inline GaussianMessage extrinsic(const GaussianMessage& post,
                                 const GaussianMessage& pri) {
  require(post.mean.size() == pri.mean.size(), "extrinsic: size mismatch");
  require_domain(post.variance > 0.0 && pri.variance > 0.0,
                 "extrinsic: variances must be positive");
  const double dprec = 1.0 / post.variance - 1.0 / pri.variance;
  const double vext = clamp_var(dprec > 0.0 ? 1.0 / dprec : kVarMax);
  GaussianMessage out{cvec(post.mean.size()), vext};
  for (std::size_t i = 0; i < out.mean.size(); ++i)
    out.mean[i] = vext * (post.mean[i] / post.variance - pri.mean[i] / pri.variance);
  return out;
}

inline double mse(const cvec& x, const cvec& xhat) {
  require(x.size() == xhat.size() && !x.empty(), "mse: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(x[i] - xhat[i]);
  return acc / static_cast<double>(x.size());
}

}  // namespace gtsr
