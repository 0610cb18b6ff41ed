#pragma once

#include <complex>
#include <functional>

namespace delaymargin {

struct QuadConfig {
  /// Termination tolerance, relative to the L1 norm of the integrand.
  double tol = 1e-10;
  unsigned max_depth = 18;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod on a finite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadConfig& cfg);

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                       double b, const QuadConfig& cfg, double* error = nullptr);

/// Integral over the real line via y = scale * tan(theta).
QuadResult integrate_line(const std::function<double(double)>& f, double scale, const QuadConfig& cfg);
std::complex<double> integrate_line_complex(const std::function<std::complex<double>(double)>& f,
                                            double scale, const QuadConfig& cfg);

/// Integral over [from, inf) via x = from + scale * tan(phi).
QuadResult integrate_half_line(const std::function<double(double)>& f, double from, double scale,
                               const QuadConfig& cfg);

}  // namespace delaymargin
