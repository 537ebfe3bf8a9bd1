#pragma once

#include <cstdint>
#include <random>

#include "gtsr/types.hpp"

namespace gtsr {

// Per-trial generator. Trials are seeded independently (base_seed + trial
// index), so results do not depend on execution order or thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return unif_(eng_); }  // [0, 1)
  double normal() { return norm_(eng_); }   // N(0, 1)

  // Circularly-symmetric complex Gaussian with total variance var.
  cplx cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    return {s * normal(), s * normal()};
  }

  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
  }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace gtsr
