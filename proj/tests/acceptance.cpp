// One PASS/FAIL line per acceptance criterion, with the measured values and
// wall time. Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "delaymargin/errors.hpp"
#include "delaymargin/stability.hpp"
#include "delaymargin/zen.hpp"
#include "oracles.hpp"

using namespace delaymargin;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs >= budget_s) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const Polynomial kS{0.0, 1.0};
const Polynomial kOne{1.0};

DelaySystem matrix_system(Polynomial P, Polynomial Q, ComplexMatrix m) {
  return DelaySystem{std::move(P), std::move(Q), shape::Matrix{std::move(m)}, std::nullopt, 0.0, false};
}

ComplexMatrix triangular() {
  ComplexMatrix m(3, 3);
  m << 1, 1, 0, 0, 2, 1, 0, 0, 2;
  return m;
}

TestSignal scalar(std::vector<SignalTerm> terms) { return TestSignal{1, std::move(terms)}; }
SignalTerm term(cplx c, int p, cplx a, int j = 0) { return {c, p, a, j}; }

Outcome example_triangular() {
  const auto r = operator_margin(matrix_system(kS, kOne, triangular()), 2.0);
  bool ok = std::abs(r.margin - pi / 4) <= 1e-9;
  double m1 = NAN, m2 = NAN;
  for (const auto& l : r.per_lambda) {
    if (std::abs(l.lambda - 1.0) < 1e-8) m1 = l.margin;
    if (std::abs(l.lambda - 2.0) < 1e-8) m2 = l.margin;
    for (const auto& e : l.events) ok = ok && e.direction == 1;
  }
  ok = ok && std::abs(m1 - pi / 2) <= 1e-9 && std::abs(m2 - pi / 4) <= 1e-9;
  return {ok, fmt("margin=%.15g per-lambda=(%.15g, %.15g)", r.margin, m1, m2)};
}

Outcome example_normal() {
  ComplexMatrix m(2, 2);
  m << 1, -1, 1, 1;
  const auto r = operator_margin(matrix_system(kS, kOne, m), 2.0);
  const double lo = pi / (4 * std::sqrt(2.0)), hi = 3 * pi / (4 * std::sqrt(2.0));
  bool ok = std::abs(r.margin - lo) <= 1e-9;
  int matched = 0;
  // Table: (1+i, +sqrt2) -> 3pi/(4sqrt2), (1+i, -sqrt2) -> pi/(4sqrt2),
  //        (1-i, +sqrt2) -> pi/(4sqrt2),  (1-i, -sqrt2) -> 3pi/(4sqrt2).
  for (const auto& l : r.per_lambda) {
    for (const auto& e : l.events) {
      const bool early = (l.lambda.imag() > 0) == (e.omega < 0);
      const double want = early ? lo : hi;
      if (std::abs(std::abs(e.omega) - std::sqrt(2.0)) <= 1e-9 && std::abs(e.h - want) <= 1e-9) ++matched;
    }
  }
  ok = ok && matched == 4;
  return {ok, fmt("margin=%.15g table entries matched=%.0f/4", r.margin, matched)};
}

Outcome example_disk() {
  DelaySystem sys{Polynomial{1.0, 1.0}, kOne, shape::Disk{1.0, 1.0}, 2.0, 0.0, false};
  const auto r = operator_margin(sys, 2.0);
  const double target = 2 * pi / (3 * std::sqrt(3.0));
  const cplx lam = r.minimizer ? r.minimizer->lambda : cplx{NAN, NAN};
  const bool ok = std::abs(r.margin - target) <= 1e-6 && std::abs(lam - 2.0) <= 1e-4 &&
                  std::abs(std::abs(lam - 1.0) - 1.0) <= 1e-6;
  const auto ex = oracle::disk_example();
  return {ok, fmt("margin=%.15g want=%.15g lambda=(%.6f,%.6f)", r.margin, target, lam.real(), lam.imag()) +
                  fmt(" closed-form minimum=%.15g", ex.margin)};
}

Outcome hinf_cross_validation() {
  const auto sys = matrix_system(kS, kOne, triangular());
  const auto inside = hinf_boundary_norm(sys, pi / 8);
  // Tail radius checked directly: ||G(s)|| <= 1 on |s| = R, Re s >= 0.
  double worst = 0.0;
  const ComplexMatrix a = triangular();
  for (int k = 0; k <= 1000; ++k) {
    const cplx s = std::polar(inside.tail_radius, -pi / 2 + pi * k / 1000.0);
    Eigen::JacobiSVD<ComplexMatrix> svd(s * ComplexMatrix::Identity(3, 3) + std::exp(-s * (pi / 8)) * a);
    worst = std::max(worst, 1.0 / svd.singularValues()(2));
  }
  const bool finite = std::isfinite(inside.sup_estimate) && worst <= 1.0 + 1e-12;

  const double h = pi / 4 + 1e-3;
  bool detected = false;
  double peak_w = NAN, peak_norm = NAN;
  try {
    const auto past = hinf_boundary_norm(sys, h);
    peak_w = past.peak_omega;
    peak_norm = boundary_norm(sys, h, peak_w);
    detected = peak_norm > 1e3 && std::abs(std::abs(peak_w) - 2.0) <= 0.05;
  } catch (const SingularOnGrid& e) {
    peak_w = e.omega();
    peak_norm = e.norm_estimate();
    detected = std::abs(std::abs(peak_w) - 2.0) <= 0.05;
  }
  return {finite && detected,
          fmt("h=pi/8: sup=%.6g R=%.4g max||G|| on |s|=R %.4g; ", inside.sup_estimate, inside.tail_radius, worst) +
              fmt("h=pi/4+1e-3: peak norm %.4g at omega=%.6f", peak_norm, peak_w)};
}

Outcome neutral() {
  const auto s = neutral_demo(20);
  bool inc = s.size() == 20;
  for (std::size_t k = 1; k < s.size(); ++k) inc = inc && s[k].gain > s[k - 1].gain;
  const double last = s.empty() ? 0.0 : s.back().gain;
  return {inc && last > 1e2, fmt("strictly increasing=%.0f |G(s_20)|=%.6g", inc, last)};
}

Outcome unbounded() {
  const auto t = unbounded_A_demo(10);
  double worst = 0.0;
  for (const auto& x : t) worst = std::max(worst, std::abs(x.sup - x.n));
  return {t.size() == 10 && worst <= 1e-6, fmt("max |sup_n - n| over n<=10: %.3g", worst)};
}

Outcome isometry() {
  const std::vector<TestSignal> any = {
      scalar({term(1.0, 0, 1.0)}), scalar({term({1.0, -2.0}, 0, {1.0, 2.0})}),
      scalar({term({3.0, 1.0}, 0, 3.0), term(1.0, 1, 1.0)}),
      TestSignal{2, {term(1.0, 0, 1.0, 0), term(1.0, 1, 2.0, 1)}}};
  const std::vector<TestSignal> vanishing = {
      scalar({term(1.0, 1, 1.0)}), scalar({term(1.0, 2, 0.5)}), scalar({term(1.0, 0, 1.0), term(-1.0, 0, 2.0)}),
      scalar({term({0.0, 1.0}, 1, {2.0, 1.0})})};
  const std::vector<MeasureDescriptor> finite = {MeasureDescriptor::dirac(0.0), MeasureDescriptor::dirac(1.0),
                                                 MeasureDescriptor::lebesgue_on(0.0, 1.0)};
  const MeasureDescriptor mixed = MeasureDescriptor::dirac(0.0) + MeasureDescriptor::lebesgue();
  int pairs = 0;
  double worst = 0.0;
  auto check = [&](const TestSignal& f, const MeasureDescriptor& nu) {
    worst = std::max(worst, verify_isometry(f, nu).rel_err);
    ++pairs;
  };
  for (const auto& nu : finite) {
    for (const auto& f : any) check(f, nu);
    for (const auto& f : vanishing) check(f, nu);
  }
  for (const auto& f : vanishing) check(f, mixed);
  const auto a = verify_isometry(scalar({term(1.0, 0, 1.0)}), MeasureDescriptor::dirac(0.0));
  const auto b = verify_isometry(scalar({term(1.0, 1, 1.0)}), MeasureDescriptor::lebesgue());
  const bool anchors = std::abs(a.lhs - pi) <= 1e-6 * pi && std::abs(a.rhs - pi) <= 1e-6 * pi &&
                       std::abs(b.lhs - pi / 4) <= 1e-6 * pi && std::abs(b.rhs - pi / 4) <= 1e-6 * pi;
  return {pairs >= 20 && worst <= 1e-6 && anchors,
          fmt("pairs=%.0f max rel_err=%.3g anchors (%.15g, %.15g)", pairs, worst, a.rhs, b.rhs)};
}

Outcome multiplier() {
  const Polynomial s1{1.0, 1.0};
  std::vector<RationalMatrix> symbols = {
      RationalMatrix::scalar(Polynomial{-1.0, 1.0}, s1),
      RationalMatrix::scalar(Polynomial{0.7}, Polynomial{1.0}),
      RationalMatrix::scalar(Polynomial{1.0}, s1),
      RationalMatrix::scalar(Polynomial{2.0, 1.0}, Polynomial{3.0, 1.0}),
      RationalMatrix::scalar(Polynomial{1.0, 1.0, 1.0}, Polynomial{3.0, 2.0, 1.0}),
      RationalMatrix::scalar(Polynomial{6.0, -5.0, 1.0}, Polynomial{6.0, 5.0, 1.0}),
      RationalMatrix::scalar(Polynomial{1.0, 0.5}, Polynomial{4.0, 1.0}),
      RationalMatrix::scalar(Polynomial{-1.5}, Polynomial{1.0}),
      RationalMatrix::diagonal({{Polynomial{-1.0, 1.0}, s1}, {Polynomial{1.0}, s1}}),
      RationalMatrix::diagonal({{Polynomial{0.3}, Polynomial{1.0}}, {Polynomial{2.0}, Polynomial{2.0, 1.0}}}),
  };
  RationalMatrix full;
  full.rows = full.cols = 2;
  full.num = {Polynomial{1.0}, Polynomial{0.5}, Polynomial{0.0, 1.0}, Polynomial{1.0}};
  full.den = {s1, Polynomial{1.0}, Polynomial{2.0, 1.0}, Polynomial{3.0, 1.0}};
  symbols.push_back(full);

  oracle::Gen gen(2024);
  double worst_excess = -1e300, worst_adjoint = 0.0;
  int samples = 0;
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const auto& G = symbols[k];
    const TestSignal f = G.cols == 1
                             ? scalar({term(1.0, 1, 1.0), term({0.0, 0.5}, 2, {2.0, 1.0})})
                             : TestSignal{2, {term(1.0, 1, 1.0, 0), term(-0.5, 2, {1.5, -1.0}, 1)}};
    const MeasureDescriptor nu = k % 3 == 0   ? MeasureDescriptor::dirac(0.0)
                                 : k % 3 == 1 ? MeasureDescriptor::lebesgue()
                                              : MeasureDescriptor::dirac(1.0);
    const double min_re = k % 3 == 2 ? 1.2 : 0.2;
    std::vector<AdjointSample> batch;
    for (int j = 0; j < 5; ++j) {
      CVector x(G.rows);
      for (int i = 0; i < G.rows; ++i) x(i) = gen.complex_in_box(1.0);
      batch.push_back({{gen.uniform(min_re, 3.0), gen.uniform(-3.0, 3.0)}, x / x.norm()});
    }
    const auto r = verify_multiplier(G, laplace(f), nu, batch);
    worst_excess = std::max(worst_excess, r.ratio - r.sup_G);
    worst_adjoint = std::max(worst_adjoint, r.adjoint_residual);
    samples += static_cast<int>(batch.size());
  }
  const auto B = RationalMatrix::scalar(Polynomial{-1.0, 1.0}, s1);
  const double blaschke =
      verify_multiplier(B, laplace(scalar({term(1.0, 0, 1.0)})), MeasureDescriptor::dirac(0.0), {}).ratio;
  const bool ok = symbols.size() >= 10 && worst_excess <= 1e-6 && samples >= 50 && worst_adjoint <= 1e-6 &&
                  blaschke >= 1.0 - 1e-3;
  return {ok, fmt("symbols=%.0f max(ratio-sup)=%.3g samples=%.0f max adjoint=%.3g", symbols.size(), worst_excess,
                  samples, worst_adjoint) +
                  fmt(" blaschke ratio=%.12g", blaschke)};
}

Outcome properties() {
  oracle::Gen gen(99);

  // Root reconstruction, degree <= 12, coefficients in [-10, 10].
  double recon = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int deg = gen.integer(1, 12);
    const auto c = gen.real_coeffs(deg, 10.0);
    const auto rs = roots(Polynomial::from_real(c), 1e-9);
    std::vector<cplx> flat;
    for (const auto& r : rs.roots)
      for (int m = 0; m < r.multiplicity; ++m) flat.push_back(r.value);
    if (static_cast<int>(flat.size()) != deg) return {false, "root count mismatch"};
    const auto back = oracle::expand(flat, c.back());
    double norm = 0.0, err = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      norm = std::max(norm, std::abs(c[k]));
      err = std::max(err, std::abs(back[k] - c[k]));
    }
    recon = std::max(recon, err / norm);
  }

  // Schur invariance.
  double schur = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = gen.integer(1, 5);
    ComplexMatrix t = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      t(i, i) = cplx{gen.uniform(0.5, 2.0), gen.uniform(-2.0, 2.0)};
      for (int j = i + 1; j < n; ++j) t(i, j) = gen.complex_in_box(0.5);
    }
    const ComplexMatrix u = gen.unitary(n);
    const double a = operator_margin(matrix_system(kS, kOne, t), 10.0).margin;
    const double b = operator_margin(matrix_system(kS, kOne, u * t * u.adjoint()), 10.0).margin;
    schur = std::max(schur, std::abs(a - b));
  }

  // Conjugation symmetry and exhaustiveness on random retarded pairs.
  int conj_bad = 0, exhaust_bad = 0, systems = 0;
  for (int trial = 0; systems < 25 && trial < 200; ++trial) {
    const int n = gen.integer(1, 4);
    const auto pc = oracle::hurwitz_coeffs(gen, n);
    const auto qc = gen.real_coeffs(gen.integer(0, n - 1), 2.0);
    const Polynomial P = Polynomial::from_real(pc), Q = Polynomial::from_real(qc);
    const cplx lambda = gen.complex_in_box(2.5);
    const auto r = analyze_lambda(P, Q, lambda, 6.0);
    const auto rc = analyze_lambda(P, Q, std::conj(lambda), 6.0);
    if (r.events.size() != rc.events.size()) ++conj_bad;
    else
      for (std::size_t k = 0; k < r.events.size(); ++k)
        if (std::abs(r.events[k].omega + rc.events[k].omega) > 1e-8 || std::abs(r.events[k].h - rc.events[k].h) > 1e-8 ||
            r.events[k].direction != rc.events[k].direction)
          ++conj_bad;
    if (r.status == Status::Degenerate || r.events.empty()) continue;
    ++systems;
    for (int k = 0; k < 25; ++k) {
      const double h = 6.0 * (k + 0.5) / 25.0;
      bool near = false;
      int predicted = r.n0;
      for (const auto& e : r.events) {
        near = near || std::abs(e.h - h) < 1e-3;
        if (e.h < h) predicted += e.direction;
      }
      if (!near && oracle::quasi_rhp_count(pc, qc, lambda, h) != predicted) ++exhaust_bad;
    }
  }
  const bool ok = recon <= 1e-6 && schur <= 1e-8 && conj_bad == 0 && systems >= 25 && exhaust_bad == 0;
  return {ok, fmt("reconstruction=%.3g schur=%.3g conj mismatches=%.0f", recon, schur, conj_bad) +
                  fmt(" exhaustiveness systems=%.0f mismatches=%.0f", systems, exhaust_bad)};
}

}  // namespace

int main() {
  criterion("triangular example", 1.0, example_triangular);
  criterion("normal example", 1.0, example_normal);
  criterion("disk example", 10.0, example_disk);
  criterion("hinf cross-validation", 5.0, hinf_cross_validation);
  criterion("neutral demo", 0.0, neutral);
  criterion("unbounded demo", 0.0, unbounded);
  criterion("zen isometry suite", 10.0, isometry);
  criterion("multiplier suite", 0.0, multiplier);
  criterion("property suites", 0.0, properties);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
