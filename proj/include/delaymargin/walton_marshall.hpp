#pragma once

#include <limits>
#include <vector>

#include "delaymargin/poly.hpp"

namespace delaymargin {

/// One imaginary-axis crossing of a root of P(s) + lambda Q(s) e^{-sh}.
struct CrossingEvent {
  cplx lambda;
  double omega = 0.0;  // crossing point s = i*omega
  double h = 0.0;      // delay at which the crossing happens
  int direction = 0;   // sign of Re ds/dh
  bool degenerate = false;
};

struct Window {
  double lo;
  double hi;  // exclusive; equals the sweep bound for the last open window
};

enum class Status { Exact, Degenerate };

struct LambdaStabilityResult {
  cplx lambda;
  int n0 = 0;  // closed right half-plane roots at h = 0
  std::vector<CrossingEvent> events;
  std::vector<Window> windows;
  /// Supremum of the stability interval containing h = 0; infinity when no
  /// crossing frequency exists at all.
  double margin = std::numeric_limits<double>::infinity();
  /// True when the crossing equation has no real solution and n0 == 0, which
  /// certifies stability for every h >= 0.
  bool crossing_free = false;
  Status status = Status::Exact;
};

struct WaltonMarshallOptions {
  double tol = 1e-9;
  RootOptions roots{};
};

struct RhpCount {
  int count = 0;
  bool boundary_root = false;  // some root has |Re s| <= tol
};

/// Roots of P + lambda Q with Re s >= -tol. Requires deg P > deg Q.
RhpCount h0_rhp_count(const Polynomial& P, const Polynomial& Q, cplx lambda, double tol = 1e-9);

struct CrossingFrequency {
  double omega;
  bool degenerate = false;
};

/// The real polynomial F(omega) = |P(i omega)|^2 - mod^2 |Q(i omega)|^2.
Polynomial crossing_polynomial(const Polynomial& P, const Polynomial& Q, double mod_lambda);

/// Real solutions of |P(i omega)| = mod_lambda |Q(i omega)|, both signs.
/// Throws IdenticallyZero when every omega solves it.
std::vector<CrossingFrequency> crossing_frequencies(const Polynomial& P, const Polynomial& Q,
                                                    double mod_lambda, double tol = 1e-9);

/// Smallest nonnegative h with e^{-i omega h} = -P(i omega) / (lambda Q(i omega)).
/// Throws DegenerateCrossing when the modulus condition fails or omega, lambda
/// or Q(i omega) vanishes.
double first_crossing_delay(const Polynomial& P, const Polynomial& Q, cplx lambda, double omega,
                            double tol = 1e-9);

/// All crossing delays in [0, h_max]: first_crossing_delay + 2 pi k / |omega|.
std::vector<double> crossing_delays(const Polynomial& P, const Polynomial& Q, cplx lambda, double omega,
                                    double h_max, double tol = 1e-9);

/// Sign of Re (1/s)[Q'(s)/Q(s) - P'(s)/P(s)] at s = i omega; 0 for a
/// tangential crossing. Independent of lambda and h.
int crossing_direction(const Polynomial& P, const Polynomial& Q, double omega, double tol = 1e-9);

/// Full delay sweep for one lambda over [0, h_max].
LambdaStabilityResult analyze_lambda(const Polynomial& P, const Polynomial& Q, cplx lambda,
                                     double h_max, WaltonMarshallOptions opts = {});

}  // namespace delaymargin
