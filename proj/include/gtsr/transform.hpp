#pragma once

// Unitary DFT, radix-2 iterative, with the 1/sqrt(N) factor applied on
// both directions so forward and adjoint are exact inverses.  The adjoint
// is the conjugate-kernel transform (the DFT matrix is symmetric).

#include <cstddef>
#include <vector>

#include "gtsr/normal.hpp"
#include "gtsr/types.hpp"

namespace gtsr {

class DftPlan {
 public:
  explicit DftPlan(std::size_t n) : n_(n) {
    require(n > 0 && (n & (n - 1)) == 0, "DftPlan: size must be a power of two");
    log2n_ = 0;
    while ((std::size_t{1} << log2n_) < n_) ++log2n_;
    bitrev_.resize(n_);
    for (std::size_t i = 1; i < n_; ++i)
      bitrev_[i] = (bitrev_[i >> 1] >> 1) | ((i & 1) << (log2n_ - 1));
    twiddle_.resize(n_ / 2);
    for (std::size_t k = 0; k < n_ / 2; ++k) {
      const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_);
      twiddle_[k] = {std::cos(ang), std::sin(ang)};
    }
  }

  std::size_t size() const { return n_; }

  cvec forward(const cvec& x) const { return apply(x, false); }
  cvec adjoint(const cvec& z) const { return apply(z, true); }

 private:
  cvec apply(const cvec& in, bool conj) const {
    require(in.size() == n_, "DftPlan: input size mismatch");
    cvec a(n_);
    for (std::size_t i = 0; i < n_; ++i) a[bitrev_[i]] = in[i];
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t base = 0; base < n_; base += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          cplx w = twiddle_[k * stride];
          if (conj) w = std::conj(w);
          const cplx u = a[base + k];
          const cplx t = w * a[base + k + len / 2];
          a[base + k] = u + t;
          a[base + k + len / 2] = u - t;
        }
      }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    for (auto& v : a) v *= scale;
    return a;
  }

  std::size_t n_, log2n_;
  std::vector<std::size_t> bitrev_;
  cvec twiddle_;
};

inline cvec dft_forward(const cvec& x, const DftPlan& plan) { return plan.forward(x); }
inline cvec dft_adjoint(const cvec& z, const DftPlan& plan) { return plan.adjoint(z); }

}  // namespace gtsr
