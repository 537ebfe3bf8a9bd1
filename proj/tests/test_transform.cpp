#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gtsr/rng.hpp"
#include "gtsr/transform.hpp"
#include "oracles.hpp"

using namespace gtsr;
using Catch::Approx;

namespace {
cvec random_cvec(std::size_t n, std::uint64_t seed, double var = 1.0) {
  Rng rng(seed);
  cvec x(n);
  for (auto& c : x) c = rng.cnormal(var);
  return x;
}
double max_abs_diff(const cvec& a, const cvec& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}
}  // namespace

TEST_CASE("impulse and constant inputs", "[transform]") {
  const DftPlan plan(16);
  cvec e0(16, cplx{0.0, 0.0});
  e0[0] = 1.0;
  const cvec flat = plan.forward(e0);
  for (auto& c : flat) CHECK(std::abs(c - cplx{0.25, 0.0}) <= 1e-15);  // 1/sqrt(16)

  const cvec ones(16, cplx{1.0, 0.0});
  const cvec spike = plan.forward(ones);
  CHECK(std::abs(spike[0] - cplx{4.0, 0.0}) <= 1e-12);
  for (std::size_t i = 1; i < 16; ++i) CHECK(std::abs(spike[i]) <= 1e-12);

  // inverse of the impulse case
  const cvec back = plan.adjoint(flat);
  CHECK(max_abs_diff(back, e0) <= 1e-14);
}

TEST_CASE("direct transform oracle at small sizes", "[transform]") {
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const DftPlan plan(n);
    const cvec x = random_cvec(n, 100 + n);
    CHECK(max_abs_diff(plan.forward(x), gtsr_test::oracle_dft(x, false)) <= 1e-12);
    CHECK(max_abs_diff(plan.adjoint(x), gtsr_test::oracle_dft(x, true)) <= 1e-12);
  }
}

TEST_CASE("unitarity", "[transform]") {
  SECTION("Parseval at n=1024") {
    const DftPlan plan(1024);
    const cvec x = random_cvec(1024, 21);
    const cvec z = plan.forward(x);
    double px = 0.0, pz = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      px += std::norm(x[i]);
      pz += std::norm(z[i]);
    }
    CHECK(pz == Approx(px).epsilon(1e-12));
  }

  SECTION("round trip at n=4096") {
    const DftPlan plan(4096);
    const cvec x = random_cvec(4096, 22);
    CHECK(max_abs_diff(plan.adjoint(plan.forward(x)), x) <= 1e-12);
    CHECK(max_abs_diff(plan.forward(plan.adjoint(x)), x) <= 1e-12);
  }
}

TEST_CASE("adjointness inner product", "[transform]") {
  const DftPlan plan(256);
  const cvec x = random_cvec(256, 31);
  const cvec z = random_cvec(256, 32);
  const cvec fx = plan.forward(x);
  const cvec fhz = plan.adjoint(z);
  cplx lhs{0.0, 0.0}, rhs{0.0, 0.0};
  for (std::size_t i = 0; i < 256; ++i) {
    lhs += std::conj(fx[i]) * z[i];  // <F x, z>
    rhs += std::conj(x[i]) * fhz[i];  // <x, F^H z>
  }
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
}

TEST_CASE("plan validation", "[transform]") {
  CHECK_THROWS_AS(DftPlan(0), std::invalid_argument);
  CHECK_THROWS_AS(DftPlan(12), std::invalid_argument);
  const DftPlan plan(8);
  CHECK_THROWS_AS(plan.forward(cvec(7)), std::invalid_argument);
  CHECK_THROWS_AS(plan.adjoint(cvec(9)), std::invalid_argument);
  CHECK(plan.size() == 8);
}
