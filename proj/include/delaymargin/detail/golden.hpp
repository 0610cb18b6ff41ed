#pragma once

#include <cmath>
#include <utility>

namespace delaymargin::detail {

struct GoldenResult {
  double x;
  double value;
  bool converged;
};

/// Golden-section search for a minimum of f on [a, b]. Stops once the
/// bracket is narrower than x_tol or, when f_tol > 0, once the two interior
/// values agree to f_tol.
template <class F>
GoldenResult golden_minimize(F&& f, double a, double b, double x_tol, double f_tol, int max_iter = 200) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(b - a) <= x_tol) return fc < fd ? GoldenResult{c, fc, true} : GoldenResult{d, fd, true};
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    const bool settled = f_tol > 0.0 && it > 8 && std::isfinite(fc) && std::isfinite(fd) && std::abs(fc - fd) <= f_tol;
    if (settled) return fc < fd ? GoldenResult{c, fc, true} : GoldenResult{d, fd, true};
  }
  return fc < fd ? GoldenResult{c, fc, false} : GoldenResult{d, fd, false};
}

}  // namespace delaymargin::detail
