#pragma once

// Scalar Gaussian special functions and moments of the standard normal
// truncated to an interval.  Everything here is arranged so that tail
// intervals far from the origin keep full relative accuracy: the naive
// Phi(b)-Phi(a) difference underflows/cancels once a,b > ~8, which the
// quantized-output denoiser hits routinely at high SNR.

#include <cmath>
#include <limits>

#include "gtsr/types.hpp"

namespace gtsr {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrtPiOver2 = 1.25331413731550025121;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Scaled complementary error function exp(x^2) erfc(x).  std::erfc keeps
// relative accuracy only while its result is normal, so beyond x ~ 24 we
// switch to the asymptotic series; ten or so terms reach ~1e-17 there.
inline double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 24.0) return std::exp(x * x) * std::erfc(x);
  const double r = 1.0 / (2.0 * x * x);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term *= -static_cast<double>(2 * k - 1) * r;
    sum += term;
    if (std::abs(term) < 1e-18 * sum) break;
  }
  return sum / (x * kSqrtPi);
}

inline double norm_pdf(double x) {
  return std::isinf(x) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * x * x);
}
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }
inline double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

// Mills ratio Phi(-x)/phi(x); stable for any x but intended for x >= 0.
inline double mills_ratio(double x) { return kSqrtPiOver2 * erfcx(x * kInvSqrt2); }

// Mass, mean and variance of N(0,1) restricted to (a, b).
struct TruncMoments {
  double prob;  // Phi(b) - Phi(a); may underflow to 0 for remote tails
  double mean;  // (phi(a) - phi(b)) / prob, computed without forming prob
  double var;   // in (0, 1]
};

namespace detail {

// phi(a) - phi(b) for finite a, b without cancellation when the two
// densities are close; falls back to the direct difference when the
// exponents differ enough that subtraction is already benign.
inline double pdf_diff(double a, double b) {
  const double d = 0.5 * (b - a) * (b + a);  // = (b^2 - a^2)/2
  if (std::abs(d) < 0.5) return norm_pdf(a) * -std::expm1(-d);
  return norm_pdf(a) - norm_pdf(b);
}

// Core for 0 <= a < b (b possibly +inf).  Works in units of phi(a):
//   D     = prob / phi(a) = R(a) - q R(b),   q = exp(-(b^2-a^2)/2)
//   mean  = (1 - q) / D
//   vterm = (b phi(b) - a phi(a)) / prob = (b q - a) / D
// with R the Mills ratio; R(a) - q R(b) is evaluated as
// (R(a) - R(b)) + (1-q) R(b) so nearby thresholds do not cancel.
inline TruncMoments trunc_nonneg(double a, double b) {
  const double ra = mills_ratio(a);
  double q = 0.0, one_m_q = 1.0, rb = 0.0, bq = 0.0;
  if (!std::isinf(b)) {
    const double d = 0.5 * (b - a) * (b + a);
    q = std::exp(-d);
    one_m_q = -std::expm1(-d);
    rb = mills_ratio(b);
    bq = b * q;
  }
  const double D = (ra - rb) + one_m_q * rb;
  TruncMoments m;
  m.prob = norm_pdf(a) * D;
  m.mean = one_m_q / D;
  const double vterm = (bq - a) / D;
  m.var = std::clamp(1.0 - (vterm + m.mean * m.mean), 0.0, 1.0);
  return m;
}

// Core for a < 0 < b.  Mass is at least phi(max(|a|,b)) (b-a), no underflow;
// erf is relatively accurate near 0 so narrow straddling intervals are fine.
inline TruncMoments trunc_straddle(double a, double b) {
  const double eb = std::isinf(b) ? 1.0 : std::erf(b * kInvSqrt2);
  const double ea = std::isinf(a) ? 1.0 : std::erf(-a * kInvSqrt2);
  const double Z = 0.5 * (ea + eb);
  const double num = (std::isinf(a) || std::isinf(b)) ? norm_pdf(a) - norm_pdf(b)
                                                      : pdf_diff(a, b);
  TruncMoments m;
  m.prob = Z;
  m.mean = num / Z;
  const double ta = std::isinf(a) ? 0.0 : a * norm_pdf(a);
  const double tb = std::isinf(b) ? 0.0 : b * norm_pdf(b);
  m.var = std::clamp(1.0 - ((tb - ta) / Z + m.mean * m.mean), 0.0, 1.0);
  return m;
}

}  // namespace detail

inline TruncMoments trunc_std_moments(double a, double b) {
  require_domain(a < b, "trunc_std_moments: empty interval");
  if (b <= 0.0) {  // reflect onto the right half line
    TruncMoments m = detail::trunc_nonneg(-b, -a);
    m.mean = -m.mean;
    return m;
  }
  if (a >= 0.0) return detail::trunc_nonneg(a, b);
  return detail::trunc_straddle(a, b);
}

}  // namespace gtsr
