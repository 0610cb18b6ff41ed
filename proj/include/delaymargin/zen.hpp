#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "delaymargin/poly.hpp"
#include "delaymargin/quadrature.hpp"

namespace delaymargin {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// ---------------------------------------------------------------------------
// Measures and weights

struct Atom {
  double location;  // r >= 0
  double mass;      // > 0
};

/// Density sum_k poly[k] r^k on [from, to].
struct DensityPiece {
  double from;
  double to;
  std::vector<double> poly;
  double operator()(double r) const;
};

/// Constant density `value` on [from, inf).
struct LebesgueTail {
  double from = 0.0;
  double value = 1.0;
};

/// A positive measure on [0, inf): point masses, compactly supported
/// piecewise-polynomial density, and an optional constant tail.
struct MeasureDescriptor {
  std::vector<Atom> atoms;
  std::vector<DensityPiece> density;
  std::optional<LebesgueTail> tail;

  static MeasureDescriptor dirac(double location = 0.0, double mass = 1.0);
  static MeasureDescriptor lebesgue();
  static MeasureDescriptor lebesgue_on(double from, double to);
  MeasureDescriptor operator+(const MeasureDescriptor& other) const;

  /// nu[0, t)
  double mass_below(double t) const;
  bool infinite_mass() const { return tail.has_value(); }
  /// Throws Error on unsorted or negative data.
  void validate() const;
};

/// Grid spanning [1e-6, 1e6] logarithmically with `points` nodes.
std::vector<double> doubling_grid(int points = 1000);

/// max over the grid of nu[0, 2t) / nu[0, t); points with nu[0, t) = 0 are
/// skipped. Throws NotDoubling above `cap`.
double doubling_constant(const MeasureDescriptor& nu, const std::vector<double>& t_grid, double cap = 1e6);

/// w(t) = 2 pi \int_0^inf e^{-2rt} d nu(r), evaluated in closed form.
class Weight {
 public:
  enum class ClosedForm { Hardy, ShiftedAtom, Lebesgue, General };

  explicit Weight(MeasureDescriptor nu);
  double operator()(double t) const;
  ClosedForm closed_form() const { return closed_; }
  const MeasureDescriptor& measure() const { return nu_; }

 private:
  MeasureDescriptor nu_;
  ClosedForm closed_;
};

Weight weight_from_measure(const MeasureDescriptor& nu);

// ---------------------------------------------------------------------------
// Signals and transforms

/// coeff * t^power * e^{-rate t} along basis vector e_component.
struct SignalTerm {
  cplx coeff;
  int power = 0;
  cplx rate;
  int component = 0;
};

/// Finite combination of exponential-polynomial terms with values in C^dim.
struct TestSignal {
  int dim = 1;
  std::vector<SignalTerm> terms;

  CVector operator()(double t) const;
  /// Closed-form Laplace transform: power! / (s + rate)^{power + 1} per term.
  CVector transform(cplx s) const;
  CVector initial_value() const;
  /// Component j alone, as a signal in C^1.
  TestSignal component(int j) const;
  void validate() const;
};

/// An H-valued function on the closed right half-plane known in closed form.
struct Transform {
  int dim = 1;
  std::function<CVector(cplx)> eval;
  /// lim s F(s) as |s| -> inf; nonzero means F decays only like 1/s.
  CVector tail_coefficient;
  /// Length scale for the quadrature substitutions.
  double scale = 1.0;
};

Transform laplace(const TestSignal& f);

struct ZenQuadConfig {
  QuadConfig outer{1e-10, 18};
  QuadConfig inner{1e-11, 18};
};

/// \int_0^inf ||f(t)||^2 w(t) dt (squared norm). Throws Divergent when the
/// weight's 1/t singularity meets f(0) != 0 or a term does not decay.
double time_norm_sq(const TestSignal& f, const Weight& w, const ZenQuadConfig& cfg = {});

/// \int \int ||F(x + iy)||^2 d nu(x) dy (squared norm), evaluated at the
/// boundary (epsilon = 0).
double frequency_norm_sq(const Transform& F, const MeasureDescriptor& nu, const ZenQuadConfig& cfg = {});

/// <F, G> in A^2_nu(C^dim), conjugate-linear in the second slot.
cplx frequency_inner(const Transform& F, const Transform& G, const MeasureDescriptor& nu,
                     const ZenQuadConfig& cfg = {});

struct IsometryCheck {
  double lhs;  // time side
  double rhs;  // frequency side
  double rel_err;
};

IsometryCheck verify_isometry(const TestSignal& f, const MeasureDescriptor& nu, const ZenQuadConfig& cfg = {});

// ---------------------------------------------------------------------------
// Reproducing kernels

/// k_z(t) = e^{-conj(z) t} / w(t) and its transform K_z = L k_z.
class Kernel {
 public:
  Kernel(cplx z, Weight w);

  cplx z() const { return z_; }
  cplx operator()(double t) const;
  /// K_z(s), closed form where the weight allows, otherwise by quadrature.
  cplx transform(cplx s) const;
  /// Whether nu[0, eps) > 0 for some eps < Re z, which bounds ||k_z||.
  bool in_space_certified() const { return std::isfinite(norm_bound_); }
  /// Bound on ||k_z||^2 from nu[0, eps); infinity when uncertified.
  double norm_bound() const { return norm_bound_; }
  /// Throws KernelNotInSpace when uncertified.
  void ensure_in_space() const;
  /// ||k_z||^2 in L^2(w) by quadrature.
  double norm_sq(const QuadConfig& cfg = {}) const;
  Transform as_transform(const CVector& direction) const;

 private:
  cplx z_;
  Weight w_;
  double norm_bound_;
};

Kernel kernel(cplx z, const Weight& w);

// ---------------------------------------------------------------------------
// Multipliers

/// Matrix of scalar rational functions num(i,j) / den(i,j).
struct RationalMatrix {
  int rows = 1;
  int cols = 1;
  std::vector<Polynomial> num;  // row-major
  std::vector<Polynomial> den;

  static RationalMatrix scalar(Polynomial num, Polynomial den);
  static RationalMatrix diagonal(std::vector<std::pair<Polynomial, Polynomial>> entries);

  CMatrix operator()(cplx s) const;
  /// Limit as |s| -> inf; throws UnboundedSymbol for an improper entry.
  CMatrix at_infinity() const;
  /// Throws UnboundedSymbol unless every pole lies in the open left half-plane.
  void check_bounded(double tol = 1e-9) const;
};

/// sup over the imaginary axis of ||G(i omega)||, from a grid refined around
/// its peaks plus the value at infinity.
double boundary_sup(const RationalMatrix& G, int grid_points = 4001);

Transform multiply(const RationalMatrix& G, const Transform& F);

struct MultiplierCheck {
  double ratio;             // ||G F|| / ||F||
  double sup_G;             // sup ||G(i omega)||
  double adjoint_residual;  // max relative defect of <GF, K_z x> = <F(z), G(z)^* x>
};

struct AdjointSample {
  cplx z;
  CVector x;
};

MultiplierCheck verify_multiplier(const RationalMatrix& G, const Transform& F, const MeasureDescriptor& nu,
                                  const std::vector<AdjointSample>& samples, const ZenQuadConfig& cfg = {});

}  // namespace delaymargin
