#include "delaymargin/walton_marshall.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_retarded(const Polynomial& P, const Polynomial& Q) {
  if (P.degree() <= Q.degree()) throw RetardedAssumptionViolated(P.degree(), Q.degree());
}

// |p(s)| small relative to the size of its terms at s.
bool vanishes_at(const Polynomial& p, cplx s, double tol) {
  return std::abs(p(s)) <= tol * std::max(p.magnitude_at(std::abs(s)), 1e-300);
}

}  // namespace

RhpCount h0_rhp_count(const Polynomial& P, const Polynomial& Q, cplx lambda, double tol) {
  require_retarded(P, Q);
  const Polynomial char_poly = P + lambda * Q;
  RhpCount out;
  for (const auto& r : roots(char_poly, tol).roots) {
    const double band = tol * (1.0 + std::abs(r.value));
    if (r.value.real() >= -band) out.count += r.multiplicity;
    if (std::abs(r.value.real()) <= band) out.boundary_root = true;
  }
  return out;
}

Polynomial crossing_polynomial(const Polynomial& P, const Polynomial& Q, double mod_lambda) {
  const Polynomial pi = on_imaginary_axis(P);
  const Polynomial qi = on_imaginary_axis(Q);
  const Polynomial f = pi * conj(pi) - (mod_lambda * mod_lambda) * (qi * conj(qi));

  // |.|^2 on the real line is real; round off the imaginary residue and any
  // coefficient that is pure cancellation noise.
  double scale = 0.0;
  for (cplx c : (pi * conj(pi)).coeffs()) scale = std::max(scale, std::abs(c));
  for (cplx c : (qi * conj(qi)).coeffs()) scale = std::max(scale, mod_lambda * mod_lambda * std::abs(c));
  std::vector<cplx> coeffs;
  for (cplx c : f.coeffs()) {
    const double re = c.real();
    coeffs.emplace_back(std::abs(re) <= 1e-14 * scale ? 0.0 : re, 0.0);
  }
  return Polynomial(std::move(coeffs));
}

std::vector<CrossingFrequency> crossing_frequencies(const Polynomial& P, const Polynomial& Q,
                                                    double mod_lambda, double tol) {
  const Polynomial f = crossing_polynomial(P, Q, mod_lambda);
  if (f.is_zero()) throw IdenticallyZero();
  std::vector<CrossingFrequency> out;
  if (f.degree() == 0) return out;
  for (const auto& r : real_roots_of_real_poly(f, tol)) {
    const cplx s{0.0, r.value};
    const bool degenerate = r.multiplicity > 1 || vanishes_at(P, s, tol) || vanishes_at(Q, s, tol);
    out.push_back({r.value, degenerate});
  }
  return out;
}

double first_crossing_delay(const Polynomial& P, const Polynomial& Q, cplx lambda, double omega, double tol) {
  if (omega == 0.0) throw DegenerateCrossing("crossing at omega = 0 does not move with h");
  if (lambda == cplx{}) throw DegenerateCrossing("lambda = 0 has no delay term");
  const cplx s{0.0, omega};
  if (vanishes_at(Q, s, tol)) throw DegenerateCrossing("Q vanishes at the crossing point");
  const cplx target = -P(s) / (lambda * Q(s));
  if (std::abs(std::abs(target) - 1.0) > 1e3 * tol) {
    throw DegenerateCrossing("|P(i omega)| != |lambda| |Q(i omega)| at omega = " + std::to_string(omega));
  }
  // e^{-i omega h} = e^{i phi}  <=>  |omega| h = -sign(omega) phi (mod 2 pi).
  const double phi = std::arg(target);
  double turn = std::fmod(omega > 0.0 ? -phi : phi, kTwoPi);
  if (turn < 0.0) turn += kTwoPi;
  if (turn > kTwoPi - 1e-12) turn = 0.0;
  return turn / std::abs(omega);
}

std::vector<double> crossing_delays(const Polynomial& P, const Polynomial& Q, cplx lambda, double omega,
                                    double h_max, double tol) {
  const double h0 = first_crossing_delay(P, Q, lambda, omega, tol);
  const double period = kTwoPi / std::abs(omega);
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double h = h0 + period * k;
    if (h > h_max) break;
    out.push_back(h);
  }
  return out;
}

int crossing_direction(const Polynomial& P, const Polynomial& Q, double omega, double tol) {
  const cplx s{0.0, omega};
  if (omega == 0.0) throw DegenerateCrossing("crossing direction undefined at s = 0");
  if (vanishes_at(P, s, tol) || vanishes_at(Q, s, tol)) {
    throw DegenerateCrossing("P or Q vanishes at the crossing point");
  }
  const cplx v = (derivative(Q)(s) / Q(s) - derivative(P)(s) / P(s)) / s;
  if (std::abs(v.real()) <= tol * std::max(1.0, std::abs(v))) return 0;
  return v.real() > 0.0 ? 1 : -1;
}

LambdaStabilityResult analyze_lambda(const Polynomial& P, const Polynomial& Q, cplx lambda, double h_max,
                                     WaltonMarshallOptions opts) {
  require_retarded(P, Q);
  const double tol = opts.tol;
  LambdaStabilityResult out;
  out.lambda = lambda;

  const RhpCount start = h0_rhp_count(P, Q, lambda, tol);
  out.n0 = start.count;
  if (start.boundary_root) out.status = Status::Degenerate;

  // Without a delay term the root set does not move with h.
  if (lambda == cplx{} || Q.is_zero()) {
    out.crossing_free = out.n0 == 0;
    if (out.n0 == 0 && !start.boundary_root) {
      out.windows.push_back({0.0, h_max});
    } else {
      out.margin = 0.0;
    }
    return out;
  }

  std::vector<CrossingFrequency> freqs;
  try {
    freqs = crossing_frequencies(P, Q, std::abs(lambda), tol);
  } catch (const IdenticallyZero&) {
    out.status = Status::Degenerate;
    out.margin = 0.0;
    return out;
  }

  double first = std::numeric_limits<double>::infinity();
  bool any_nonzero = false;
  for (const auto& f : freqs) {
    if (std::abs(f.omega) <= tol) {
      // An omega = 0 solution is a crossing only if s = 0 is a root for every h.
      if (vanishes_at(P + lambda * Q, cplx{}, tol)) {
        out.status = Status::Degenerate;
        out.margin = 0.0;
        out.events.clear();
        out.windows.clear();
        return out;
      }
      continue;
    }
    any_nonzero = true;
    CrossingEvent ev;
    ev.lambda = lambda;
    ev.omega = f.omega;
    ev.degenerate = f.degenerate;
    double h0;
    try {
      h0 = first_crossing_delay(P, Q, lambda, f.omega, tol);
      ev.direction = crossing_direction(P, Q, f.omega, tol);
    } catch (const DegenerateCrossing&) {
      out.status = Status::Degenerate;
      continue;
    }
    if (ev.direction == 0) ev.degenerate = true;
    first = std::min(first, h0);
    const double period = kTwoPi / std::abs(f.omega);
    for (int k = 0;; ++k) {
      ev.h = h0 + period * k;
      if (ev.h > h_max) break;
      out.events.push_back(ev);
    }
  }
  std::sort(out.events.begin(), out.events.end(), [](const CrossingEvent& a, const CrossingEvent& b) {
    return a.h != b.h ? a.h < b.h : a.omega < b.omega;
  });

  out.crossing_free = !any_nonzero && out.n0 == 0;
  if (out.n0 > 0 || start.boundary_root) out.margin = 0.0;
  else out.margin = first;

  // Sweep the root count; stop at the first degenerate crossing.
  int count = out.n0;
  bool open = count == 0 && !start.boundary_root;
  double open_at = 0.0;
  for (std::size_t i = 0; i < out.events.size();) {
    const double h = out.events[i].h;
    int delta = 0;
    bool degenerate = false;
    std::size_t j = i;
    for (; j < out.events.size() && out.events[j].h - h <= tol * (1.0 + h); ++j) {
      delta += out.events[j].direction;
      degenerate = degenerate || out.events[j].degenerate;
    }
    if (degenerate || count + delta < 0) {
      out.status = Status::Degenerate;
      if (open && h > open_at) out.windows.push_back({open_at, h});
      open = false;
      break;
    }
    count += delta;
    if (open && count > 0) {
      if (h > open_at) out.windows.push_back({open_at, h});
      open = false;
    } else if (!open && count == 0) {
      open = true;
      open_at = h;
    }
    i = j;
  }
  if (open && h_max > open_at) out.windows.push_back({open_at, h_max});
  return out;
}

}  // namespace delaymargin
