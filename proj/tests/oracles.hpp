#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's own root finder, crossing logic or winding code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Hand-rolled generators; seeded explicitly so every run sees the same cases.
struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
  cplx complex_in_box(double r) { return {uniform(-r, r), uniform(-r, r)}; }

  std::vector<double> real_coeffs(int degree, double r) {
    std::vector<double> c(static_cast<std::size_t>(degree + 1));
    for (auto& x : c) x = uniform(-r, r);
    while (std::abs(c.back()) < 0.1 * r) c.back() = uniform(-r, r);
    return c;
  }

  Eigen::MatrixXcd unitary(int n) {
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = complex_in_box(1.0);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  }

  // I - 2 v v^* / |v|^2
  Eigen::MatrixXcd householder(int n) {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = complex_in_box(1.0);
    return Eigen::MatrixXcd::Identity(n, n) - 2.0 * v * v.adjoint() / v.squaredNorm();
  }
};

// Expand prod (s - r_k) into ascending coefficients.
inline std::vector<cplx> expand(const std::vector<cplx>& roots, cplx lead) {
  std::vector<cplx> c{lead};
  for (cplx r : roots) {
    std::vector<cplx> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = next;
  }
  return c;
}

// Real Hurwitz polynomial of degree n: random left half-plane roots, complex
// ones in conjugate pairs.
inline std::vector<double> hurwitz_coeffs(Gen& gen, int n) {
  std::vector<cplx> r;
  while (static_cast<int>(r.size()) < n) {
    const double re = -gen.uniform(0.2, 2.0);
    if (n - static_cast<int>(r.size()) >= 2 && gen.integer(0, 1) == 1) {
      const double im = gen.uniform(0.1, 2.0);
      r.push_back({re, im});
      r.push_back({re, -im});
    } else {
      r.push_back(re);
    }
  }
  std::vector<double> c;
  for (cplx x : expand(r, gen.uniform(0.5, 2.0))) c.push_back(x.real());
  return c;
}

inline cplx horner(const std::vector<double>& c, cplx s) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

inline cplx horner(const std::vector<cplx>& c, cplx s) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

// Number of zeros of an analytic f inside the rectangle (0, R) x (-R, R),
// by accumulating the unwrapped phase of f along its boundary. Steps are
// halved until every phase increment is below 0.3 rad.
inline int right_rectangle_zeros(const std::function<cplx(cplx)>& f, double R, int base_steps = 4000) {
  auto point = [&](double t) {  // t in [0, 4], counterclockwise from iR
    if (t <= 1.0) return cplx{0.0, R * (1.0 - 2.0 * t)};
    if (t <= 2.0) return cplx{R * (t - 1.0), -R};
    if (t <= 3.0) return cplx{R, R * (2.0 * (t - 2.0) - 1.0)};
    return cplx{R * (4.0 - t), R};
  };
  std::function<double(double, double, cplx, cplx, int)> walk = [&](double a, double b, cplx fa, cplx fb,
                                                                    int depth) -> double {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < 0.3 || depth > 40) return d;
    const double m = 0.5 * (a + b);
    const cplx fm = f(point(m));
    return walk(a, m, fa, fm, depth + 1) + walk(m, b, fm, fb, depth + 1);
  };
  double total = 0.0;
  cplx prev = f(point(0.0));
  for (int k = 1; k <= base_steps; ++k) {
    const double a = 4.0 * (k - 1) / base_steps;
    const double b = 4.0 * k / base_steps;
    const cplx next = f(point(b));
    total += walk(a, b, prev, next, 0);
    prev = next;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

// Radius beyond which |P(s)| > |lambda| |Q(s)| + 1 for |s| >= R (Cauchy-style
// coefficient bound, R >= 1).
inline double cauchy_radius(const std::vector<double>& P, const std::vector<double>& Q, double mod_lambda) {
  double sum = 1.0;
  for (std::size_t k = 0; k + 1 < P.size(); ++k) sum += std::abs(P[k]);
  for (double q : Q) sum += mod_lambda * std::abs(q);
  return 1.0 + sum / std::abs(P.back());
}

// Right half-plane zeros of P(s) + lambda Q(s) e^{-sh}. The rectangle covers
// every zero with Re s >= 0 because none has |s| >= R. Its left edge sits on
// the imaginary axis, so callers keep h away from crossing delays.
inline int quasi_rhp_count(const std::vector<double>& P, const std::vector<double>& Q, cplx lambda, double h) {
  const double R = cauchy_radius(P, Q, std::abs(lambda));
  return right_rectangle_zeros(
      [&](cplx s) { return horner(P, s) + lambda * horner(Q, s) * std::exp(-s * h); }, R);
}

// Minimum of a unimodal f on [a, b] by golden-section; dense pre-scan picks
// the bracket.
inline std::pair<double, double> minimize(const std::function<double(double)>& f, double a, double b,
                                          int scan = 20000) {
  double best_x = a, best_f = f(a);
  for (int k = 1; k <= scan; ++k) {
    const double x = a + (b - a) * k / scan;
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  double lo = std::max(a, best_x - (b - a) / scan), hi = std::min(b, best_x + (b - a) / scan);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    if (f(c) < f(d)) hi = d;
    else lo = c;
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

// (s + 1) + lambda e^{-sh} over the closed disk |lambda - 1| <= 1. At a
// crossing s = i w (w > 0) the modulus is rho = sqrt(1 + w^2) <= 2, the lambdas
// of that modulus in the disk have |arg lambda| <= acos(rho / 2), and the
// first delay is (pi - atan w + arg lambda) / w, smallest at the lower end of
// the arc. Returns (margin, w*, lambda*).
struct DiskExample {
  double margin;
  double omega;
  cplx lambda;
};

inline DiskExample disk_example() {
  auto h_of = [](double w) {
    const double rho = std::sqrt(1.0 + w * w);
    return (kPi - std::atan(w) - std::acos(std::min(1.0, rho / 2.0))) / w;
  };
  const auto [w, h] = minimize(h_of, 1e-3, std::sqrt(3.0));
  const double rho = std::sqrt(1.0 + w * w);
  return {h, w, std::polar(rho, -std::acos(rho / 2.0))};
}

// Brute-force sup of ||(P(i w) I + Q(i w) e^{-i w h} A)^{-1}|| on a uniform grid.
inline double dense_boundary_sup(const std::vector<double>& P, const std::vector<double>& Q,
                                 const Eigen::MatrixXcd& A, double h, double W, double step) {
  double best = 0.0;
  const auto n = A.rows();
  for (double w = -W; w <= W; w += step) {
    const cplx s{0.0, w};
    const Eigen::MatrixXcd m =
        horner(P, s) * Eigen::MatrixXcd::Identity(n, n) + horner(Q, s) * std::exp(-s * h) * A;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    best = std::max(best, 1.0 / svd.singularValues()(n - 1));
  }
  return best;
}

}  // namespace oracle
