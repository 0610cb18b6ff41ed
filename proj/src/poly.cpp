#include "delaymargin/poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "delaymargin/errors.hpp"

namespace delaymargin {

Polynomial::Polynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

Polynomial::Polynomial(std::initializer_list<double> coeffs)
    : coeffs_(coeffs.begin(), coeffs.end()) {
  normalize();
}

Polynomial Polynomial::from_real(std::span<const double> coeffs) {
  return Polynomial(std::vector<cplx>(coeffs.begin(), coeffs.end()));
}

void Polynomial::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
}

cplx Polynomial::coeff(int k) const {
  if (k < 0 || k >= static_cast<int>(coeffs_.size())) return {};
  return coeffs_[static_cast<std::size_t>(k)];
}

bool Polynomial::is_real(double tol) const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [tol](cplx c) {
    return std::abs(c.imag()) <= tol * (1.0 + std::abs(c));
  });
}

cplx Polynomial::operator()(cplx s) const {
  cplx acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::magnitude_at(double r) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<cplx> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
  }
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + cplx(-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> c(a.coeffs_.size() + b.coeffs_.size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(cplx c, const Polynomial& a) {
  std::vector<cplx> out = a.coeffs_;
  for (auto& x : out) x *= c;
  return Polynomial(std::move(out));
}

Polynomial derivative(const Polynomial& p) {
  if (p.degree() < 1) return {};
  std::vector<cplx> d(static_cast<std::size_t>(p.degree()));
  for (int k = 1; k <= p.degree(); ++k) d[static_cast<std::size_t>(k - 1)] = double(k) * p.coeff(k);
  return Polynomial(std::move(d));
}

Polynomial reflect(const Polynomial& p) {
  std::vector<cplx> c = p.coeffs();
  for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
  return Polynomial(std::move(c));
}

Polynomial on_imaginary_axis(const Polynomial& p) {
  std::vector<cplx> c = p.coeffs();
  cplx ik{1.0, 0.0};
  for (auto& x : c) {
    x *= ik;
    ik *= cplx{0.0, 1.0};
  }
  return Polynomial(std::move(c));
}

Polynomial conj(const Polynomial& p) {
  std::vector<cplx> c = p.coeffs();
  for (auto& x : c) x = std::conj(x);
  return Polynomial(std::move(c));
}

Polynomial from_roots(std::span<const cplx> roots, cplx lead) {
  Polynomial acc(std::vector<cplx>{lead});
  for (cplx r : roots) acc = acc * Polynomial(std::vector<cplx>{-r, 1.0});
  return acc;
}

int RootSet::total_multiplicity() const {
  int n = 0;
  for (const auto& r : roots) n += r.multiplicity;
  return n;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double backward_error(const Polynomial& p, cplx z) {
  const double scale = p.magnitude_at(std::abs(z));
  return scale > 0.0 ? std::abs(p(z)) / scale : 0.0;
}

// Aberth-Ehrlich iteration on a polynomial with nonzero constant term.
std::vector<cplx> aberth(const Polynomial& p, int max_iterations) {
  const int n = p.degree();
  const Polynomial dp = derivative(p);
  std::vector<cplx> z(static_cast<std::size_t>(n));

  // Start on a circle around the root centroid whose radius matches the
  // geometric mean of the root moduli about that centroid.
  const cplx centroid = -p.coeff(n - 1) / (double(n) * p.leading());
  double radius = std::pow(std::abs(p(centroid) / p.leading()), 1.0 / n);
  if (!(radius > 0.0) || !std::isfinite(radius)) radius = 1.0;
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
    z[static_cast<std::size_t>(k)] = centroid + std::polar(radius, angle);
  }

  std::vector<bool> done(z.size(), false);
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool all_done = true;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (done[i]) continue;
      const cplx pv = p(z[i]);
      if (std::abs(pv) <= 4.0 * kEps * p.magnitude_at(std::abs(z[i]))) {
        done[i] = true;
        continue;
      }
      all_done = false;
      const cplx dv = dp(z[i]);
      cplx repulsion{};
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j != i) repulsion += 1.0 / (z[i] - z[j]);
      }
      cplx step;
      if (dv == cplx{}) {
        step = std::polar(1e-3 * (1.0 + std::abs(z[i])), 0.7 * double(iter + 1));
      } else {
        const cplx newton = pv / dv;
        step = newton / (1.0 - newton * repulsion);
      }
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
      z[i] -= step;
      if (std::abs(step) <= kEps * std::abs(z[i])) done[i] = true;
    }
    if (all_done) break;
  }
  return z;
}

void polish(const Polynomial& p, std::vector<cplx>& z) {
  const Polynomial dp = derivative(p);
  for (auto& r : z) {
    for (int k = 0; k < 3; ++k) {
      const cplx dv = dp(r);
      if (dv == cplx{}) break;
      const cplx candidate = r - p(r) / dv;
      if (!(std::abs(p(candidate)) < std::abs(p(r)))) break;
      r = candidate;
    }
  }
}

}  // namespace

RootSet roots(const Polynomial& p, double tol, RootOptions opts) {
  if (p.is_zero()) throw ZeroPolynomial();
  RootSet out;
  if (p.degree() == 0) return out;

  // Exact zero roots come from vanishing low-order coefficients.
  int zero_mult = 0;
  while (p.coeff(zero_mult) == cplx{}) ++zero_mult;
  std::vector<cplx> raw(static_cast<std::size_t>(zero_mult), cplx{});

  const Polynomial reduced(
      std::vector<cplx>(p.coeffs().begin() + zero_mult, p.coeffs().end()));
  if (reduced.degree() == 1) {
    raw.push_back(-reduced.coeff(0) / reduced.coeff(1));
  } else if (reduced.degree() > 1) {
    std::vector<cplx> z = aberth(reduced, opts.max_iterations);
    polish(reduced, z);
    raw.insert(raw.end(), z.begin(), z.end());
  }

  for (cplx r : raw) out.residual_bound = std::max(out.residual_bound, backward_error(p, r));
  if (!(out.residual_bound <= tol)) {
    throw NonConvergence("root finder backward error " + std::to_string(out.residual_bound) +
                         " exceeds tolerance after " + std::to_string(opts.max_iterations) +
                         " iterations");
  }

  // Greedy clustering at absolute radius 1e3 * tol.
  const double radius = 1e3 * tol;
  std::vector<bool> used(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (used[i]) continue;
    cplx sum = raw[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (!used[j] && std::abs(raw[j] - raw[i]) <= radius) {
        used[j] = true;
        sum += raw[j];
        ++count;
      }
    }
    out.roots.push_back({sum / double(count), count});
  }
  return out;
}

std::vector<RealRoot> real_roots_of_real_poly(const Polynomial& p, double tol, RootOptions opts) {
  if (!p.is_real(tol)) throw Error("real_roots_of_real_poly: coefficients are not real");
  std::vector<RealRoot> out;
  for (const auto& r : roots(p, tol, opts).roots) {
    if (std::abs(r.value.imag()) <= tol * (1.0 + std::abs(r.value))) {
      out.push_back({r.value.real(), r.multiplicity});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
  return out;
}

}  // namespace delaymargin
