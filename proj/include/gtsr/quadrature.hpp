#pragma once

// Gauss rule generators (Newton on the recurrence, NR-style) plus the
// composite-panel driver used for the state-evolution integrals.  The
// integrands there have two widely separated length scales (quantizer
// cell width vs prior spread), so fixed global rules stall around 1e-6;
// panels sized to the smaller scale reach ~1e-12 and keep the
// node-doubling invariance tests honest.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gtsr/normal.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

struct GaussRule {
  std::vector<double> nodes, weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {
inline void check_order(int n) {
  require(n >= 1 && n <= 512, "quadrature: order must lie in [1,512]");
}
}  // namespace detail

// Probabilists' Gauss-Hermite: E[f(Z)] ~= sum w_i f(x_i) for Z ~ N(0,1);
// weights sum to 1.  Built from the orthonormal physicists' recurrence.
inline GaussRule gauss_hermite_prob(int n) {
  detail::check_order(n);
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const double pim4 = 0.75112554446494248286;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[1];
    else
      z = 2.0 * z - r.nodes[i - 2];
    int its = 0;
    for (; its < 200; ++its) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    if (its == 200) throw std::runtime_error("gauss_hermite_prob: Newton stalled");
    r.nodes[i] = z;
    r.nodes[n - 1 - i] = -z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / (pp * pp);
  }
  // physicists' -> probabilists': x *= sqrt(2), w /= sqrt(pi)
  for (int i = 0; i < n; ++i) {
    r.nodes[i] *= kSqrt2;
    r.weights[i] /= kSqrtPi;
  }
  return r;
}

// Gauss-Laguerre for int_0^inf e^{-t} f(t) dt.  The recurrence is kept in
// scaled units (the polynomials reach ~e^{x/2} at the far roots) so large
// orders neither overflow nor NaN; weights that underflow come out 0.
inline GaussRule gauss_laguerre(int n) {
  detail::check_order(n);
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      z = 3.0 / (1.0 + 2.4 * n);
    else if (i == 1)
      z += 15.0 / (1.0 + 2.5 * n);
    else
      z += ((1.0 + 2.55 * (i - 1)) / (1.9 * (i - 1))) * (z - r.nodes[i - 2]);
    double ratio = 0.0, scale = 0.0, p1 = 1.0, p2 = 0.0;
    int its = 0;
    for (; its < 200; ++its) {
      p1 = 1.0;
      p2 = 0.0;
      scale = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0 - z) * p2 - j * p3) / (j + 1.0);
        const double mag = std::abs(p1) + std::abs(p2);
        if (mag > 1e100) {
          p1 /= mag;
          p2 /= mag;
          scale += std::log(mag);
        }
      }
      // pp = n (p1 - p2) / z in the same scaled units as p1, p2
      ratio = p1 * z / (n * (p1 - p2));
      z -= ratio;
      // Mixed criterion: the recurrence noise floor gives |ratio| ~ 1e-15
      // absolute at the small first roots (where 1e-14*z alone is
      // unreachable), while the far roots (~700 at n=192) need the
      // relative term because their ulp exceeds any fixed absolute EPS.
      if (std::abs(ratio) <= 1e-14 * z + 1e-14) break;
    }
    if (its == 200) throw std::runtime_error("gauss_laguerre: Newton stalled");
    r.nodes[i] = z;
    const double pp = n * (p1 - p2) / z;
    const double lw = -std::log(std::abs(pp * n * p2)) - 2.0 * scale;
    r.weights[i] = (lw < -745.0) ? 0.0 : std::copysign(std::exp(lw), -pp * p2);
  }
  return r;
}

// Gauss-Legendre on [-1,1]; weights sum to 2.
inline GaussRule gauss_legendre(int n) {
  detail::check_order(n);
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    int its = 0;
    for (; its < 200; ++its) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15) break;
    }
    if (its == 200) throw std::runtime_error("gauss_legendre: Newton stalled");
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = r.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return r;
}

// Composite Gauss-Legendre over [a,b] split into npanels equal pieces.
template <class F>
double integrate_panels(const GaussRule& gl, double a, double b, int npanels, F&& f) {
  require(npanels >= 1 && b > a, "integrate_panels: bad interval");
  const double w = (b - a) / npanels;
  double tot = 0.0;
  for (int p = 0; p < npanels; ++p) {
    const double mid = a + (p + 0.5) * w, hw = 0.5 * w;
    double acc = 0.0;
    for (int i = 0; i < gl.size(); ++i)
      acc += gl.weights[i] * f(mid + hw * gl.nodes[i]);
    tot += hw * acc;
  }
  return tot;
}

// Bundled rules for the state-evolution integrals.  refine scales panel
// counts; doubling order + refine is the accuracy-invariance knob.
struct QuadratureRule {
  GaussRule gauss;   // prob-normalized Hermite
  GaussRule radial;  // Laguerre
  GaussRule panel;   // Legendre segment rule
  double refine = 1.0;

  static QuadratureRule make(int gauss_nodes = 95, int radial_nodes = 96,
                             int panel_order = 12, double refine = 1.0) {
    require(refine >= 1.0 && refine <= 64.0, "QuadratureRule: refine must lie in [1,64]");
    QuadratureRule q;
    q.gauss = gauss_hermite_prob(gauss_nodes);
    q.radial = gauss_laguerre(radial_nodes);
    q.panel = gauss_legendre(panel_order);
    q.refine = refine;
    return q;
  }

  static const QuadratureRule& default_rule() {
    static const QuadratureRule q = make();
    return q;
  }
};

}  // namespace gtsr
