#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "delaymargin/poly.hpp"

namespace delaymargin {

using ComplexMatrix = Eigen::MatrixXcd;

/// Eigenvalues with multiplicity. Complex Hessenberg reduction followed by
/// shifted QR; throws NonConvergence if the iteration does not settle or the
/// backward error exceeds tol * ||m||.
std::vector<cplx> eigenvalues(const ComplexMatrix& m, double tol = 1e-9);

/// Largest singular value.
double spectral_norm(const ComplexMatrix& m);

namespace shape {

struct Points {
  std::vector<cplx> values;
};
struct Matrix {
  ComplexMatrix entries;
};
struct Disk {
  cplx center;
  double radius;
};
struct Circle {
  cplx center;
  double radius;
};
struct Annulus {
  cplx center;
  double r_inner;
  double r_outer;
};
struct Union;

}  // namespace shape

/// A computable description of the spectrum of an operator: an explicit point
/// set, a matrix whose eigenvalues form the set, or a simple planar region.
class SpectrumDescriptor {
 public:
  using Variant = std::variant<shape::Points, shape::Matrix, shape::Disk, shape::Circle,
                               shape::Annulus, std::vector<SpectrumDescriptor>>;

  SpectrumDescriptor(shape::Points p);
  SpectrumDescriptor(shape::Matrix m);
  SpectrumDescriptor(shape::Disk d);
  SpectrumDescriptor(shape::Circle c);
  SpectrumDescriptor(shape::Annulus a);
  static SpectrumDescriptor make_union(std::vector<SpectrumDescriptor> members);

  const Variant& variant() const { return *v_; }

  /// True for Points and Matrix, whose spectrum is a finite set.
  bool is_discrete() const;
  /// Finite point set of a discrete descriptor (eigenvalues for Matrix).
  std::vector<cplx> points(double tol = 1e-9) const;
  /// Euclidean distance from z to the set.
  double distance(cplx z, double tol = 1e-9) const;
  bool contains(cplx z, double tol) const { return distance(z, tol) <= tol; }

 private:
  explicit SpectrumDescriptor(Variant v);
  std::shared_ptr<const Variant> v_;
};

struct Interval {
  double lo;
  double hi;
};

/// Range of |z| over a descriptor. `pieces` lists the disjoint intervals that
/// make up the range; min_mod/max_mod are its hull.
struct ModulusRange {
  double min_mod;
  double max_mod;
  std::vector<Interval> pieces;

  bool contains(double rho, double tol) const;
};

ModulusRange modulus_range(const SpectrumDescriptor& d, double tol = 1e-9);

struct CandidateOptions {
  int arc_samples = 720;
};

/// An arc of the circle |z| = rho, parameterized by angle in [start, end].
struct Arc {
  double rho;
  double start;
  double end;
  cplx at(double angle) const { return std::polar(rho, angle); }
};

/// Exact intersection of the circle |z| = rho with the descriptor: isolated
/// points for discrete members and closed arcs for continuum members.
struct CircleIntersection {
  std::vector<cplx> points;
  std::vector<Arc> arcs;
};

CircleIntersection intersect_circle(const SpectrumDescriptor& d, double rho, double tol = 1e-9);

/// Finite sample of {lambda in d : |lambda| = rho}. Arcs are sampled at the
/// angular density arc_samples per full turn, always including both ends.
std::vector<cplx> candidates_for_modulus(const SpectrumDescriptor& d, double rho, double tol = 1e-9,
                                         CandidateOptions opts = {});

struct SubnormalBounds {
  SpectrumDescriptor lower;
  SpectrumDescriptor upper;
};

/// Given the spectrum of the minimal normal extension, the spectrum of the
/// subnormal operator lies between `lower` (the same set) and `upper` (the
/// set with its bounded complementary components filled in).
SubnormalBounds subnormal_bounds(const SpectrumDescriptor& sigma_n);

}  // namespace delaymargin
