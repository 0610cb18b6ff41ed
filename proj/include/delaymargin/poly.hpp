#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace delaymargin {

using cplx = std::complex<double>;

/// Polynomial in s with complex coefficients, ascending order: coeffs()[k]
/// multiplies s^k. Trailing zeros are stripped on construction, so the zero
/// polynomial has an empty coefficient list and degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coeffs);
  Polynomial(std::initializer_list<double> coeffs);
  static Polynomial from_real(std::span<const double> coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<cplx>& coeffs() const& { return coeffs_; }
  std::vector<cplx> coeffs() && { return std::move(coeffs_); }
  cplx coeff(int k) const;
  cplx leading() const { return coeffs_.empty() ? cplx{} : coeffs_.back(); }

  /// True when every imaginary part is at most tol * (1 + |coefficient|).
  bool is_real(double tol = 0.0) const;

  /// Horner evaluation.
  cplx operator()(cplx s) const;
  /// Sum of |a_k| |s|^k; the natural scale for backward-error checks.
  double magnitude_at(double r) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(cplx c, const Polynomial& a);
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void normalize();
  std::vector<cplx> coeffs_;
};

Polynomial derivative(const Polynomial& p);

/// p(-s), obtained by flipping the sign of odd coefficients.
Polynomial reflect(const Polynomial& p);

/// The polynomial in omega equal to p(i*omega).
Polynomial on_imaginary_axis(const Polynomial& p);

/// Coefficient-wise complex conjugate.
Polynomial conj(const Polynomial& p);

/// Monic polynomial with the given roots, scaled by `lead`.
Polynomial from_roots(std::span<const cplx> roots, cplx lead = 1.0);

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  /// Largest componentwise backward error |p(r)| / sum |a_k||r|^k.
  double residual_bound = 0.0;

  int total_multiplicity() const;
};

struct RootOptions {
  int max_iterations = 200;
};

/// All complex roots. Aberth-Ehrlich simultaneous iteration followed by
/// Newton polishing; roots closer than 1e3 * tol are merged into one root
/// (at the cluster centroid) carrying the combined multiplicity.
RootSet roots(const Polynomial& p, double tol, RootOptions opts = {});

struct RealRoot {
  double value;
  int multiplicity = 1;
};

/// Real members of roots(p), ascending. A root r counts as real when
/// |Im r| <= tol * (1 + |r|).
std::vector<RealRoot> real_roots_of_real_poly(const Polynomial& p, double tol,
                                              RootOptions opts = {});

}  // namespace delaymargin
