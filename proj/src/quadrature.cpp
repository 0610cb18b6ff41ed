#include "delaymargin/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace delaymargin {

namespace {
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, const QuadConfig& cfg) {
  QuadResult out;
  out.value = GK::integrate(f, a, b, cfg.max_depth, cfg.tol, &out.error);
  return out;
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f, double a,
                                       double b, const QuadConfig& cfg, double* error) {
  const auto re = integrate([&](double x) { return f(x).real(); }, a, b, cfg);
  const auto im = integrate([&](double x) { return f(x).imag(); }, a, b, cfg);
  if (error) *error = std::hypot(re.error, im.error);
  return {re.value, im.value};
}

QuadResult integrate_line(const std::function<double(double)>& f, double scale, const QuadConfig& cfg) {
  auto mapped = [&](double theta) {
    const double c = std::cos(theta);
    return f(scale * std::tan(theta)) * scale / (c * c);
  };
  // Split at 0 so a peak near y = 0 never straddles the first bisection.
  const auto left = integrate(mapped, -kHalfPi, 0.0, cfg);
  const auto right = integrate(mapped, 0.0, kHalfPi, cfg);
  return {left.value + right.value, left.error + right.error};
}

std::complex<double> integrate_line_complex(const std::function<std::complex<double>(double)>& f,
                                            double scale, const QuadConfig& cfg) {
  const auto re = integrate_line([&](double y) { return f(y).real(); }, scale, cfg);
  const auto im = integrate_line([&](double y) { return f(y).imag(); }, scale, cfg);
  return {re.value, im.value};
}

QuadResult integrate_half_line(const std::function<double(double)>& f, double from, double scale,
                               const QuadConfig& cfg) {
  auto mapped = [&](double phi) {
    const double c = std::cos(phi);
    return f(from + scale * std::tan(phi)) * scale / (c * c);
  };
  return integrate(mapped, 0.0, kHalfPi, cfg);
}

}  // namespace delaymargin
