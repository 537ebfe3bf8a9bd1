#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gtsr/quadrature.hpp"

using namespace gtsr;
using Catch::Approx;

namespace {
double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
}  // namespace

TEST_CASE("probabilists' Hermite rule", "[quadrature]") {
  for (int n : {31, 61, 95, 128}) {
    const GaussRule g = gauss_hermite_prob(n);
    REQUIRE(g.size() == n);
    double sw = 0.0;
    for (double w : g.weights) {
      CHECK(w > 0.0);
      sw += w;
    }
    CHECK(sw == Approx(1.0).epsilon(1e-12));  // \int Dz = 1

    // standard-normal moments: E z^2 = 1, E z^4 = 3, E z^6 = 15, odd = 0
    double m1 = 0.0, m2 = 0.0, m4 = 0.0, m6 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = g.nodes[i], w = g.weights[i];
      m1 += w * x;
      m2 += w * x * x;
      m4 += w * x * x * x * x;
      m6 += w * std::pow(x, 6);
    }
    CHECK(m1 == Approx(0.0).margin(1e-13));
    CHECK(m2 == Approx(1.0).epsilon(1e-10));
    CHECK(m4 == Approx(3.0).epsilon(1e-10));
    CHECK(m6 == Approx(15.0).epsilon(1e-10));
  }
}

TEST_CASE("Laguerre rule", "[quadrature]") {
  SECTION("moments of the exponential weight") {
    const GaussRule g = gauss_laguerre(64);
    for (int k = 0; k <= 10; ++k) {
      double mk = 0.0;
      for (int i = 0; i < g.size(); ++i) mk += g.weights[i] * std::pow(g.nodes[i], k);
      CHECK(mk == Approx(factorial(k)).epsilon(1e-10));  // \int e^{-t} t^k = k!
    }
  }

  SECTION("large orders stay finite") {
    const GaussRule g = gauss_laguerre(192);
    double sw = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      CHECK(std::isfinite(g.nodes[i]));
      CHECK(std::isfinite(g.weights[i]));
      CHECK(g.weights[i] >= 0.0);
      sw += g.weights[i];
    }
    CHECK(sw == Approx(1.0).epsilon(1e-10));
    CHECK(g.nodes.back() > 600.0);  // support reaches far into the tail
  }
}

TEST_CASE("Legendre rule", "[quadrature]") {
  const GaussRule g = gauss_legendre(12);  // exact through degree 23
  for (int k = 0; k <= 23; ++k) {
    double mk = 0.0;
    for (int i = 0; i < g.size(); ++i) mk += g.weights[i] * std::pow(g.nodes[i], k);
    const double want = (k % 2) ? 0.0 : 2.0 / (k + 1);
    CHECK(mk == Approx(want).margin(1e-14).epsilon(1e-12));
  }
  double sw = 0.0;
  for (double w : g.weights) {
    CHECK(w > 0.0);
    sw += w;
  }
  CHECK(sw == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("composite panel integration", "[quadrature]") {
  const GaussRule g = gauss_legendre(12);
  const double s = integrate_panels(g, 0.0, kPi, 8,
                                    [](double x) { return std::sin(x); });
  CHECK(s == Approx(2.0).epsilon(1e-13));

  const double e = integrate_panels(g, -1.0, 3.0, 16,
                                    [](double x) { return std::exp(x); });
  CHECK(e == Approx(std::exp(3.0) - std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("rule order validation", "[quadrature]") {
  CHECK_THROWS_AS(gauss_hermite_prob(0), std::invalid_argument);
  CHECK_THROWS_AS(gauss_laguerre(-3), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(513), std::invalid_argument);
  CHECK_NOTHROW(gauss_legendre(1));
  CHECK_NOTHROW(gauss_hermite_prob(512));
}

TEST_CASE("default rule composition", "[quadrature]") {
  const QuadratureRule& q = QuadratureRule::default_rule();
  CHECK(q.gauss.size() >= 61);
  CHECK(q.radial.size() >= 64);
  CHECK(q.panel.size() >= 8);
  CHECK(q.refine == 1.0);
}
