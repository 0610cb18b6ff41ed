#include "delaymargin/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>

#include <Eigen/SVD>

#include "delaymargin/detail/golden.hpp"
#include "delaymargin/errors.hpp"
#include "delaymargin/parallel.hpp"

namespace delaymargin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularRatio = 1e-10;

std::vector<Window> intersect(const std::vector<Window>& a, const std::vector<Window>& b) {
  std::vector<Window> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double lo = std::max(a[i].lo, b[j].lo);
    const double hi = std::min(a[i].hi, b[j].hi);
    if (lo < hi) out.push_back({lo, hi});
    if (a[i].hi < b[j].hi) ++i;
    else ++j;
  }
  return out;
}

std::vector<Window> intersect_all(const std::vector<LambdaStabilityResult>& results) {
  if (results.empty()) return {};
  std::vector<Window> acc = results.front().windows;
  for (std::size_t k = 1; k < results.size(); ++k) acc = intersect(acc, results[k].windows);
  return acc;
}

std::vector<LambdaStabilityResult> analyze_all(const DelaySystem& sys, const std::vector<cplx>& lambdas,
                                               double h_max, double tol) {
  std::vector<LambdaStabilityResult> out(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    out[i] = analyze_lambda(sys.P, sys.Q, lambdas[i], h_max, {.tol = tol});
  });
  return out;
}

// Boundary points of each continuum member, used for the h = 0 check and for
// the per-sample sweeps.
void boundary_samples(const SpectrumDescriptor& d, int n, std::vector<cplx>& out) {
  auto ring = [&](cplx c, double r) {
    for (int k = 0; k < n; ++k) out.push_back(c + std::polar(r, kTwoPi * k / n));
  };
  if (const auto* disk = std::get_if<shape::Disk>(&d.variant())) {
    out.push_back(disk->center);
    ring(disk->center, disk->radius);
  } else if (const auto* circle = std::get_if<shape::Circle>(&d.variant())) {
    ring(circle->center, circle->radius);
  } else if (const auto* ann = std::get_if<shape::Annulus>(&d.variant())) {
    ring(ann->center, ann->r_inner);
    ring(ann->center, ann->r_outer);
  } else if (const auto* u = std::get_if<std::vector<SpectrumDescriptor>>(&d.variant())) {
    for (const auto& m : *u)
      if (!m.is_discrete()) boundary_samples(m, n, out);
  }
}

std::vector<cplx> discrete_members(const SpectrumDescriptor& d, double tol) {
  if (d.is_discrete()) return d.points(tol);
  std::vector<cplx> out;
  if (const auto* u = std::get_if<std::vector<SpectrumDescriptor>>(&d.variant())) {
    for (const auto& m : *u) {
      auto pts = discrete_members(m, tol);
      out.insert(out.end(), pts.begin(), pts.end());
    }
  }
  return out;
}

struct ArcBest {
  double h = kInf;
  cplx lambda{};
};

// Smallest first-crossing delay over the lambdas of the spectrum that can
// cross at s = i omega, i.e. those with |lambda| = |P(i omega)/Q(i omega)|.
class ContinuumSearch {
 public:
  ContinuumSearch(const DelaySystem& sys, const StabilityOptions& opts)
      : sys_(sys), opts_(opts), range_(modulus_range(sys.spectrum, opts.tol)) {}

  const ModulusRange& range() const { return range_; }

  ArcBest at(double omega) const {
    ArcBest best;
    if (std::abs(omega) <= opts_.tol) return best;
    const cplx s{0.0, omega};
    const cplx q = sys_.Q(s);
    if (std::abs(q) == 0.0) return best;
    const double rho = std::abs(sys_.P(s)) / std::abs(q);
    if (!range_.contains(rho, opts_.tol)) return best;
    const auto hit = intersect_circle(sys_.spectrum, rho, opts_.tol);

    auto delay = [&](cplx lambda) {
      try {
        return first_crossing_delay(sys_.P, sys_.Q, lambda, omega, opts_.tol);
      } catch (const DegenerateCrossing&) {
        return kInf;
      }
    };
    for (cplx lambda : hit.points) {
      const double h = delay(lambda);
      if (h < best.h) best = {h, lambda};
    }
    for (const auto& arc : hit.arcs) {
      const double len = arc.end - arc.start;
      const int n = std::max(1, static_cast<int>(std::ceil(opts_.arc_samples * len / kTwoPi)));
      int best_k = -1;
      double best_h = kInf;
      for (int k = 0; k <= n; ++k) {
        const double h = delay(arc.at(arc.start + len * k / n));
        if (h < best_h) {
          best_h = h;
          best_k = k;
        }
      }
      if (best_k < 0) continue;
      const double a = arc.start + len * std::max(0, best_k - 1) / n;
      const double b = arc.start + len * std::min(n, best_k + 1) / n;
      const auto refined = detail::golden_minimize([&](double t) { return delay(arc.at(t)); }, a, b,
                                                   1e-13 * (1.0 + std::abs(b)), 0.0);
      if (refined.value < best_h) {
        best_h = refined.value;
        if (best_h < best.h) best = {best_h, arc.at(refined.x)};
      } else if (best_h < best.h) {
        best = {best_h, arc.at(arc.start + len * best_k / n)};
      }
    }
    return best;
  }

 private:
  const DelaySystem& sys_;
  StabilityOptions opts_;
  ModulusRange range_;
};

StabilityReport discrete_margin(const DelaySystem& sys, const std::vector<cplx>& lambdas, double h_max,
                                const StabilityOptions& opts) {
  StabilityReport report;
  report.per_lambda = analyze_all(sys, lambdas, h_max, opts.tol);
  report.margin = kInf;
  for (const auto& r : report.per_lambda) {
    report.margin = std::min(report.margin, r.margin);
    if (r.status == Status::Degenerate) report.status = Status::Degenerate;
  }
  report.aggregate_windows = intersect_all(report.per_lambda);
  return report;
}

StabilityReport continuum_margin(const DelaySystem& sys, double h_max, const StabilityOptions& opts) {
  StabilityReport report;
  const double tol = opts.tol;
  ContinuumSearch search(sys, opts);

  // Crossing frequencies live where |P(i omega)| <= max_mod |Q(i omega)|.
  DelaySystem bounded = sys;
  bounded.norm_A = search.range().max_mod;
  const double omega_max = tail_radius(bounded);

  std::vector<double> omegas;
  const int n = std::max(3, opts.omega_grid);
  for (int k = 0; k < n; ++k) omegas.push_back(-omega_max + 2.0 * omega_max * k / (n - 1));
  for (const auto& piece : search.range().pieces) {
    for (double rho : {piece.lo, piece.hi}) {
      try {
        for (const auto& f : crossing_frequencies(sys.P, sys.Q, rho, tol)) omegas.push_back(f.omega);
      } catch (const IdenticallyZero&) {
      }
    }
  }
  std::sort(omegas.begin(), omegas.end());
  omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());

  std::vector<ArcBest> values(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) { values[i] = search.at(omegas[i]); });

  // Refine the deepest local minima of the grid.
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!std::isfinite(values[i].h)) continue;
    const double left = i > 0 ? values[i - 1].h : kInf;
    const double right = i + 1 < omegas.size() ? values[i + 1].h : kInf;
    if (values[i].h <= left && values[i].h <= right) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return values[a].h < values[b].h; });
  if (minima.size() > 8) minima.resize(8);

  ContinuumMinimizer best{{}, 0.0, kInf};
  std::mutex guard;
  parallel_for(minima.size(), [&](std::size_t m) {
    const std::size_t i = minima[m];
    ContinuumMinimizer local{values[i].lambda, omegas[i], values[i].h};
    const double a = omegas[i > 0 ? i - 1 : i];
    const double b = omegas[i + 1 < omegas.size() ? i + 1 : i];
    if (b > a) {
      const auto r = detail::golden_minimize([&](double w) { return search.at(w).h; }, a, b,
                                             1e-12 * (1.0 + std::abs(b)), 0.0);
      if (r.value < local.h) local = {search.at(r.x).lambda, r.x, r.value};
    }
    std::lock_guard lock(guard);
    if (local.h < best.h || (local.h == best.h && local.omega > best.omega)) best = local;
  });

  report.margin = best.h;
  if (std::isfinite(best.h)) report.minimizer = best;

  // h = 0: a reference root count on the continuum, then any discrete members.
  std::vector<cplx> samples;
  boundary_samples(sys.spectrum, std::max(1, opts.boundary_samples), samples);
  for (cplx lambda : samples) {
    const auto count = h0_rhp_count(sys.P, sys.Q, lambda, tol);
    if (count.count > 0 || count.boundary_root) {
      report.margin = 0.0;
      report.notes.push_back("spectrum contains lambda unstable at h = 0");
      break;
    }
  }

  std::vector<cplx> lambdas = discrete_members(sys.spectrum, tol);
  if (report.minimizer) lambdas.insert(lambdas.begin(), report.minimizer->lambda);
  lambdas.insert(lambdas.end(), samples.begin(), samples.end());
  report.per_lambda = analyze_all(sys, lambdas, h_max, tol);
  for (const auto& r : report.per_lambda) {
    report.margin = std::min(report.margin, r.margin);
    if (r.status == Status::Degenerate) report.status = Status::Degenerate;
  }

  const auto sampled = intersect_all(report.per_lambda);
  report.windows_per_sample_only = true;
  if (report.margin > 0.0) report.aggregate_windows.push_back({0.0, std::min(report.margin, h_max)});
  for (const auto& w : sampled)
    if (w.lo > report.margin + tol) report.aggregate_windows.push_back(w);
  report.notes.push_back("continuum spectrum: windows after the first are from sampled lambdas only");
  return report;
}

StabilityReport margin_for(const DelaySystem& sys, double h_max, const StabilityOptions& opts) {
  if (sys.spectrum.is_discrete()) return discrete_margin(sys, sys.spectrum.points(opts.tol), h_max, opts);
  return continuum_margin(sys, h_max, opts);
}

}  // namespace

double DelaySystem::norm() const {
  if (norm_A) return *norm_A;
  if (const auto* m = std::get_if<shape::Matrix>(&spectrum.variant())) return spectral_norm(m->entries);
  return modulus_range(spectrum).max_mod;
}

void DelaySystem::validate(double tol) const {
  if (P.degree() <= Q.degree()) throw RetardedAssumptionViolated(P.degree(), Q.degree());
  if (!P.is_real(tol) || !Q.is_real(tol)) throw Error("P and Q must have real coefficients");
  const double radius = modulus_range(spectrum, tol).max_mod;
  if (norm() < radius * (1.0 - 1e-12) - tol) {
    throw Error("norm_A = " + std::to_string(norm()) + " is below the spectral radius " + std::to_string(radius));
  }
  if (!(h >= 0.0)) throw Error("delay h must be nonnegative");
}

StabilityReport operator_margin(const DelaySystem& sys, double h_max, StabilityOptions opts) {
  sys.validate(opts.tol);
  if (!sys.subnormal) return margin_for(sys, h_max, opts);

  const auto sandwich = subnormal_bounds(sys.spectrum);
  DelaySystem filled = sys;
  filled.spectrum = sandwich.upper;
  StabilityReport report = margin_for(filled, h_max, opts);
  const StabilityReport necessary = margin_for(sys, h_max, opts);
  report.bounds = MarginBounds{report.margin, necessary.margin};
  if (necessary.status == Status::Degenerate) report.status = Status::Degenerate;
  report.notes.push_back("subnormal operator: margin is the lower bound over sigma(N) with holes filled");
  return report;
}

double tail_radius(const DelaySystem& sys) {
  const int n = sys.P.degree();
  if (n <= sys.Q.degree()) throw RetardedAssumptionViolated(n, sys.Q.degree());
  const double norm_a = sys.norm();
  const double lead = std::abs(sys.P.leading());

  // g(r) = r^{1-n} (|p_n| r^n - sum_{k<n} |p_k| r^k - ||A|| sum |q_k| r^k - 1)
  // is increasing in r, so its sign change is found by bisection.
  auto g = [&](double r) {
    double v = lead * r;
    for (int k = 0; k < n; ++k) v -= std::abs(sys.P.coeff(k)) * std::pow(r, k - n + 1);
    for (int k = 0; k <= sys.Q.degree(); ++k) v -= norm_a * std::abs(sys.Q.coeff(k)) * std::pow(r, k - n + 1);
    return v - std::pow(r, 1 - n);
  };
  double lo = 1.0;
  if (g(lo) > 0.0) return lo;
  double hi = 2.0;
  while (!(g(hi) > 0.0)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double boundary_norm(const DelaySystem& sys, double h, double omega, HinfCertificate::Method* method) {
  const cplx s{0.0, omega};
  const cplx p = sys.P(s);
  const cplx q = sys.Q(s) * std::exp(-s * h);
  double smallest;
  double scale;
  if (const auto* m = std::get_if<shape::Matrix>(&sys.spectrum.variant())) {
    const auto& a = m->entries;
    const ComplexMatrix op = p * ComplexMatrix::Identity(a.rows(), a.cols()) + q * a;
    Eigen::JacobiSVD<ComplexMatrix> svd(op);
    smallest = svd.singularValues()(svd.singularValues().size() - 1);
    scale = std::abs(p) + std::abs(q) * sys.norm();
    if (method) *method = HinfCertificate::Method::SmallestSingularValue;
  } else {
    // Normal A: ||(pI + qA)^{-1}|| = 1 / dist(0, p + q sigma(A)).
    smallest = std::abs(q) == 0.0 ? std::abs(p) : std::abs(q) * sys.spectrum.distance(-p / q);
    scale = std::abs(p) + std::abs(q) * sys.norm();
    if (method) *method = HinfCertificate::Method::NormalSpectrum;
  }
  if (smallest <= kSingularRatio * scale) {
    throw SingularOnGrid(omega, smallest > 0.0 ? 1.0 / smallest : kInf);
  }
  return 1.0 / smallest;
}

int rhp_zero_count(const Polynomial& P, const Polynomial& Q, cplx lambda, double h, double radius) {
  auto f = [&](cplx s) { return P(s) + lambda * Q(s) * std::exp(-s * h); };
  // Contour parameter t in [0, 2): t < 1 walks the imaginary axis from i R
  // down to -i R, t >= 1 the right semicircle back up.
  auto point = [&](double t) {
    if (t < 1.0) return cplx{0.0, radius * (1.0 - 2.0 * t)};
    return std::polar(radius, std::numbers::pi * (t - 1.0) - 0.5 * std::numbers::pi);
  };
  std::function<double(double, double, cplx, cplx, int)> sweep = [&](double a, double b, cplx fa, cplx fb,
                                                                     int depth) -> double {
    const double m = 0.5 * (a + b);
    const cplx fm = f(point(m));
    const double d1 = std::arg(fm / fa);
    const double d2 = std::arg(fb / fm);
    if (depth >= 48 || (std::abs(d1) < 0.25 && std::abs(d2) < 0.25)) return d1 + d2;
    return sweep(a, m, fa, fm, depth + 1) + sweep(m, b, fm, fb, depth + 1);
  };
  double total = 0.0;
  const int pieces = 256;
  cplx prev = f(point(0.0));
  for (int k = 1; k <= pieces; ++k) {
    const double a = 2.0 * (k - 1) / pieces;
    const double b = 2.0 * k / pieces;
    const cplx next = f(point(k == pieces ? 0.0 : b));
    total += sweep(a, b, prev, next, 0);
    prev = next;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

HinfCertificate hinf_boundary_norm(const DelaySystem& sys, double h, GridConfig cfg) {
  HinfCertificate cert;
  cert.h = h;
  cert.tail_radius = tail_radius(sys);
  boundary_norm(sys, h, 0.0, &cert.method);

  const int n = std::max(3, cfg.points);
  const double r = cert.tail_radius;
  std::vector<double> omegas(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) omegas[static_cast<std::size_t>(k)] = -r + 2.0 * r * k / (n - 1);
  // Singular points are collected rather than thrown from the workers so the
  // reported crossing does not depend on scheduling: the rightmost one wins.
  std::optional<SingularOnGrid> singular;
  std::mutex singular_guard;
  auto note_singular = [&](const SingularOnGrid& e) {
    std::lock_guard lock(singular_guard);
    if (!singular || e.omega() > singular->omega()) singular = e;
  };

  std::vector<double> norms(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) {
    try {
      norms[i] = boundary_norm(sys, h, omegas[i]);
    } catch (const SingularOnGrid& e) {
      norms[i] = kInf;
      note_singular(e);
    }
  });
  if (singular) throw *singular;

  // Golden-section refinement on every local maximum of the grid.
  std::vector<std::pair<double, double>> extra;
  std::mutex guard;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const double left = i > 0 ? norms[i - 1] : -kInf;
    const double right = i + 1 < norms.size() ? norms[i + 1] : -kInf;
    if (norms[i] >= left && norms[i] >= right) peaks.push_back(i);
  }
  bool converged = true;
  parallel_for(peaks.size(), [&](std::size_t m) {
    const std::size_t i = peaks[m];
    const double a = omegas[i > 0 ? i - 1 : i];
    const double b = omegas[i + 1 < omegas.size() ? i + 1 : i];
    if (!(b > a)) return;
    std::vector<std::pair<double, double>> local;
    detail::GoldenResult res{};
    try {
      res = detail::golden_minimize(
          [&](double w) {
            const double v = boundary_norm(sys, h, w);
            local.emplace_back(w, v);
            return -v;
          },
          a, b, std::min(cfg.tol, 1e-13) * std::max(1.0, std::abs(b)), 0.0, cfg.max_refine_iterations);
    } catch (const SingularOnGrid& e) {
      note_singular(e);
      return;
    }
    std::lock_guard lock(guard);
    converged = converged && res.converged;
    extra.insert(extra.end(), local.begin(), local.end());
  });

  if (singular) throw *singular;

  for (std::size_t i = 0; i < omegas.size(); ++i) cert.grid.emplace_back(omegas[i], norms[i]);
  cert.grid.insert(cert.grid.end(), extra.begin(), extra.end());
  std::sort(cert.grid.begin(), cert.grid.end());
  cert.refined = converged;
  cert.sup_estimate = 1.0;
  for (const auto& [w, v] : cert.grid) cert.sup_estimate = std::max(cert.sup_estimate, v);
  // Real P, Q and A give a norm symmetric in omega; report the rightmost peak.
  for (const auto& [w, v] : cert.grid)
    if (v >= cert.sup_estimate * (1.0 - 1e-9)) cert.peak_omega = w;

  if (sys.spectrum.is_discrete()) {
    int poles = 0;
    for (cplx lambda : sys.spectrum.points(cfg.tol)) poles += rhp_zero_count(sys.P, sys.Q, lambda, h, r);
    cert.rhp_poles = poles;
    if (poles > 0) cert.sup_estimate = kInf;
  }
  return cert;
}

std::vector<NeutralSample> neutral_demo(int n_max) {
  if (n_max < 1) throw Error("neutral_demo: n_max must be >= 1");
  std::vector<NeutralSample> out;
  for (int n = 1; n <= n_max; ++n) {
    const double a = (2 * n + 1) * std::numbers::pi;
    const cplx s{0.0, a + 1.0 / a};
    out.push_back({n, s, 1.0 / std::abs(s + 1.0 + s * std::exp(-s))});
  }
  return out;
}

std::vector<TruncationSample> unbounded_A_demo(int n_trunc, GridConfig cfg) {
  if (n_trunc < 1) throw Error("unbounded_A_demo: n_trunc must be >= 1");
  std::vector<TruncationSample> out;
  std::vector<cplx> eig;
  for (int n = 1; n <= n_trunc; ++n) {
    eig.emplace_back(1.0 / n, double(n));
    DelaySystem sys{Polynomial{0.0, 1.0}, Polynomial{1.0}, shape::Points{eig}, std::nullopt, 0.0, false};
    const auto cert = hinf_boundary_norm(sys, 0.0, cfg);
    out.push_back({n, cert.sup_estimate, cert.peak_omega});
  }
  return out;
}

}  // namespace delaymargin
