#pragma once

#include <optional>
#include <string>
#include <vector>

#include "delaymargin/poly.hpp"
#include "delaymargin/spectrum.hpp"
#include "delaymargin/walton_marshall.hpp"

namespace delaymargin {

/// G(s) = (P(s) I + Q(s) e^{-sh} A)^{-1}, with A known through its spectrum.
struct DelaySystem {
  Polynomial P;
  Polynomial Q;
  SpectrumDescriptor spectrum;
  /// Operator norm bound ||A||. When absent: the spectral norm for a matrix,
  /// otherwise the largest modulus in the spectrum (exact for normal A).
  std::optional<double> norm_A;
  double h = 0.0;
  /// When set, `spectrum` is the spectrum of the minimal normal extension of
  /// a subnormal A rather than the spectrum of A itself.
  bool subnormal = false;

  double norm() const;
  /// Throws on a non-retarded pair, non-real P or Q, or a norm bound below
  /// the spectral radius.
  void validate(double tol = 1e-9) const;
};

struct StabilityOptions {
  double tol = 1e-9;
  int arc_samples = 720;
  int omega_grid = 4001;
  /// Number of continuum lambdas (per member) whose full sweep is reported.
  int boundary_samples = 32;
};

/// Minimizer found by the continuum search.
struct ContinuumMinimizer {
  cplx lambda;
  double omega;
  double h;
};

struct MarginBounds {
  double lower;  // over sigma(N) with holes filled (sufficient)
  double upper;  // over sigma(N) (necessary)
};

struct HinfCertificate {
  enum class Method { SmallestSingularValue, NormalSpectrum };

  double h = 0.0;
  std::vector<std::pair<double, double>> grid;  // (omega, ||G(i omega)||), ascending
  double tail_radius = 0.0;
  double sup_estimate = 1.0;
  double peak_omega = 0.0;
  bool refined = false;
  Method method = Method::SmallestSingularValue;
  /// Zeros of det(P I + Q e^{-sh} A) with Re s > 0, by the argument principle
  /// on the half-disk of radius tail_radius. Discrete spectra only. When
  /// positive, G has poles in the right half-plane and sup_estimate is inf.
  std::optional<int> rhp_poles;
};

struct StabilityReport {
  std::vector<LambdaStabilityResult> per_lambda;
  std::vector<Window> aggregate_windows;
  double margin = 0.0;
  /// Continuum spectra: windows after the first come from the sampled
  /// lambdas only.
  bool windows_per_sample_only = false;
  std::optional<MarginBounds> bounds;
  std::optional<ContinuumMinimizer> minimizer;
  std::optional<HinfCertificate> certificate;
  Status status = Status::Exact;
  std::vector<std::string> notes;
};

StabilityReport operator_margin(const DelaySystem& sys, double h_max, StabilityOptions opts = {});

/// R >= 1 with |P(s)| > |Q(s)| ||A|| + 1 for every |s| >= R.
double tail_radius(const DelaySystem& sys);

/// ||G(i omega)||. Throws SingularOnGrid when the boundary operator is
/// numerically singular.
double boundary_norm(const DelaySystem& sys, double h, double omega,
                     HinfCertificate::Method* method = nullptr);

struct GridConfig {
  int points = 2001;
  double tol = 1e-9;
  int max_refine_iterations = 200;
};

/// Winding number of P(s) + lambda Q(s) e^{-sh} around the boundary of
/// {Re s > 0, |s| < radius}.
int rhp_zero_count(const Polynomial& P, const Polynomial& Q, cplx lambda, double h, double radius);

HinfCertificate hinf_boundary_norm(const DelaySystem& sys, double h, GridConfig cfg = {});

struct NeutralSample {
  int n;
  cplx s;
  double gain;  // |G(s)|
};

/// |1 / (s + 1 + s e^{-s})| at s_n = i((2n+1)pi + 1/((2n+1)pi)), n = 1..n_max.
std::vector<NeutralSample> neutral_demo(int n_max);

struct TruncationSample {
  int n;
  double sup;
  double peak_omega;
};

/// Boundary sup of (sI + A_n)^{-1} for A_n = diag(k i + 1/k), k = 1..n.
std::vector<TruncationSample> unbounded_A_demo(int n_trunc, GridConfig cfg = {});

}  // namespace delaymargin
