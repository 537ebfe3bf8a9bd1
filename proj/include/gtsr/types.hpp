#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

namespace gtsr {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

// All message/posterior variances are clamped to this range before use.
// Extrinsic subtraction can transiently produce non-positive variances;
// clamping keeps the iteration alive instead of erroring out.
inline constexpr double kVarMin = 1e-12;
inline constexpr double kVarMax = 1e12;

inline double clamp_var(double v) { return std::clamp(v, kVarMin, kVarMax); }

// Signaled when a recursion loses a positive precision (see state_evolution).
struct diverged_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_domain(bool cond, const char* msg) {
  if (!cond) throw std::domain_error(msg);
}

}  // namespace gtsr
