#include "delaymargin/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::vector<cplx> eigenvalues(const ComplexMatrix& m, double tol) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw Error("eigenvalues: matrix must be square, n >= 1");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) throw NonConvergence("eigenvalues: QR iteration did not converge");

  const double scale = std::max(spectral_norm(m), 1e-300);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const double residual = (m * vectors.col(k) - values(k) * vectors.col(k)).norm() /
                            std::max(vectors.col(k).norm(), 1e-300);
    if (residual > tol * scale) {
      throw NonConvergence("eigenvalues: backward error " + std::to_string(residual / scale) +
                           " exceeds tolerance");
    }
  }
  return {values.data(), values.data() + values.size()};
}

double spectral_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

SpectrumDescriptor::SpectrumDescriptor(Variant v) : v_(std::make_shared<const Variant>(std::move(v))) {}
SpectrumDescriptor::SpectrumDescriptor(shape::Points p) : SpectrumDescriptor(Variant(std::move(p))) {}
SpectrumDescriptor::SpectrumDescriptor(shape::Matrix m) : SpectrumDescriptor(Variant(std::move(m))) {
  const auto& e = std::get<shape::Matrix>(*v_).entries;
  if (e.rows() < 1 || e.rows() != e.cols()) throw Error("matrix spectrum must be square with n >= 1");
  if (!e.allFinite()) throw Error("matrix spectrum has non-finite entries");
}
SpectrumDescriptor::SpectrumDescriptor(shape::Disk d) : SpectrumDescriptor(Variant(d)) {
  if (!(d.radius >= 0.0)) throw Error("disk radius must be nonnegative");
}
SpectrumDescriptor::SpectrumDescriptor(shape::Circle c) : SpectrumDescriptor(Variant(c)) {
  if (!(c.radius >= 0.0)) throw Error("circle radius must be nonnegative");
}
SpectrumDescriptor::SpectrumDescriptor(shape::Annulus a) : SpectrumDescriptor(Variant(a)) {
  if (!(a.r_inner >= 0.0 && a.r_inner <= a.r_outer)) throw Error("annulus requires 0 <= r_inner <= r_outer");
}

SpectrumDescriptor SpectrumDescriptor::make_union(std::vector<SpectrumDescriptor> members) {
  if (members.empty()) throw Error("union spectrum must have at least one member");
  return SpectrumDescriptor(Variant(std::move(members)));
}

bool SpectrumDescriptor::is_discrete() const {
  return std::visit(overloaded{
                        [](const shape::Points&) { return true; },
                        [](const shape::Matrix&) { return true; },
                        [](const std::vector<SpectrumDescriptor>& u) {
                          return std::all_of(u.begin(), u.end(),
                                             [](const auto& m) { return m.is_discrete(); });
                        },
                        [](const auto&) { return false; },
                    },
                    *v_);
}

std::vector<cplx> SpectrumDescriptor::points(double tol) const {
  return std::visit(overloaded{
                        [](const shape::Points& p) { return p.values; },
                        [tol](const shape::Matrix& m) { return eigenvalues(m.entries, tol); },
                        [tol](const std::vector<SpectrumDescriptor>& u) {
                          std::vector<cplx> out;
                          for (const auto& m : u) {
                            auto pts = m.points(tol);
                            out.insert(out.end(), pts.begin(), pts.end());
                          }
                          return out;
                        },
                        [](const auto&) -> std::vector<cplx> {
                          throw UnsupportedDescriptor("continuum spectrum has no finite point set");
                        },
                    },
                    *v_);
}

double SpectrumDescriptor::distance(cplx z, double tol) const {
  auto from_points = [z](const std::vector<cplx>& pts) {
    double best = INFINITY;
    for (cplx p : pts) best = std::min(best, std::abs(z - p));
    return best;
  };
  return std::visit(overloaded{
                        [&](const shape::Points& p) { return from_points(p.values); },
                        [&](const shape::Matrix& m) { return from_points(eigenvalues(m.entries, tol)); },
                        [z](const shape::Disk& d) { return std::max(0.0, std::abs(z - d.center) - d.radius); },
                        [z](const shape::Circle& c) { return std::abs(std::abs(z - c.center) - c.radius); },
                        [z](const shape::Annulus& a) {
                          const double r = std::abs(z - a.center);
                          if (r < a.r_inner) return a.r_inner - r;
                          if (r > a.r_outer) return r - a.r_outer;
                          return 0.0;
                        },
                        [z, tol](const std::vector<SpectrumDescriptor>& u) {
                          double best = INFINITY;
                          for (const auto& m : u) best = std::min(best, m.distance(z, tol));
                          return best;
                        },
                    },
                    *v_);
}

bool ModulusRange::contains(double rho, double tol) const {
  return std::any_of(pieces.begin(), pieces.end(),
                     [=](const Interval& i) { return rho >= i.lo - tol && rho <= i.hi + tol; });
}

namespace {

std::vector<Interval> pieces_of(const SpectrumDescriptor& d, double tol) {
  auto from_points = [](const std::vector<cplx>& pts) {
    std::vector<Interval> out;
    for (cplx p : pts) out.push_back({std::abs(p), std::abs(p)});
    return out;
  };
  return std::visit(overloaded{
                        [&](const shape::Points& p) { return from_points(p.values); },
                        [&](const shape::Matrix& m) { return from_points(eigenvalues(m.entries, tol)); },
                        [](const shape::Disk& disk) {
                          const double c = std::abs(disk.center);
                          return std::vector<Interval>{{std::max(0.0, c - disk.radius), c + disk.radius}};
                        },
                        [](const shape::Circle& circle) {
                          const double c = std::abs(circle.center);
                          return std::vector<Interval>{{std::abs(c - circle.radius), c + circle.radius}};
                        },
                        [](const shape::Annulus& a) {
                          const double c = std::abs(a.center);
                          double lo = 0.0;
                          if (c <= a.r_inner) lo = a.r_inner - c;
                          else if (c > a.r_outer) lo = c - a.r_outer;
                          return std::vector<Interval>{{lo, c + a.r_outer}};
                        },
                        [tol](const std::vector<SpectrumDescriptor>& u) {
                          std::vector<Interval> out;
                          for (const auto& m : u) {
                            auto p = pieces_of(m, tol);
                            out.insert(out.end(), p.begin(), p.end());
                          }
                          return out;
                        },
                    },
                    d.variant());
}

}  // namespace

ModulusRange modulus_range(const SpectrumDescriptor& d, double tol) {
  auto raw = pieces_of(d, tol);
  std::sort(raw.begin(), raw.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  ModulusRange out{INFINITY, -INFINITY, {}};
  for (const auto& piece : raw) {
    if (!out.pieces.empty() && piece.lo <= out.pieces.back().hi + tol) {
      out.pieces.back().hi = std::max(out.pieces.back().hi, piece.hi);
    } else {
      out.pieces.push_back(piece);
    }
  }
  if (!out.pieces.empty()) {
    out.min_mod = out.pieces.front().lo;
    out.max_mod = out.pieces.back().hi;
  }
  return out;
}

namespace {

// Angular half-width of {theta : cos(theta - arg c) >= kappa}; NaN when empty.
double half_width_at_least(double kappa, double tol) {
  if (kappa > 1.0 + tol) return NAN;
  if (kappa >= 1.0) return 0.0;
  if (kappa <= -1.0) return std::numbers::pi;
  return std::acos(kappa);
}

void intersect_into(const SpectrumDescriptor& d, double rho, double tol, CircleIntersection& out) {
  auto add_points = [&](const std::vector<cplx>& pts) {
    for (cplx p : pts)
      if (std::abs(std::abs(p) - rho) <= tol) out.points.push_back(p);
  };
  // cos(theta - arg c) compared against kappa(r) describes |rho e^{i theta} - c| <= r.
  auto kappa = [rho](cplx c, double r) {
    const double m = std::abs(c);
    return (rho * rho + m * m - r * r) / (2.0 * rho * m);
  };
  std::visit(overloaded{
                 [&](const shape::Points& p) { add_points(p.values); },
                 [&](const shape::Matrix& m) { add_points(eigenvalues(m.entries, tol)); },
                 [&](const shape::Disk& disk) {
                   const double m = std::abs(disk.center);
                   if (rho <= tol) {
                     if (m <= disk.radius + tol) out.points.push_back(0.0);
                     return;
                   }
                   if (m <= tol) {
                     if (rho <= disk.radius + tol) out.arcs.push_back({rho, -std::numbers::pi, std::numbers::pi});
                     return;
                   }
                   const double w = half_width_at_least(kappa(disk.center, disk.radius), tol);
                   if (std::isnan(w)) return;
                   const double phi = std::arg(disk.center);
                   if (w == 0.0) out.points.push_back(std::polar(rho, phi));
                   else out.arcs.push_back({rho, phi - w, phi + w});
                 },
                 [&](const shape::Circle& circle) {
                   const double m = std::abs(circle.center);
                   if (rho <= tol) {
                     if (std::abs(m - circle.radius) <= tol) out.points.push_back(0.0);
                     return;
                   }
                   if (m <= tol) {
                     if (std::abs(rho - circle.radius) <= tol)
                       out.arcs.push_back({rho, -std::numbers::pi, std::numbers::pi});
                     return;
                   }
                   const double k = kappa(circle.center, circle.radius);
                   if (std::abs(k) > 1.0 + tol) return;
                   const double w = std::acos(std::clamp(k, -1.0, 1.0));
                   const double phi = std::arg(circle.center);
                   out.points.push_back(std::polar(rho, phi + w));
                   if (w > 0.0 && w < std::numbers::pi) out.points.push_back(std::polar(rho, phi - w));
                 },
                 [&](const shape::Annulus& a) {
                   const double m = std::abs(a.center);
                   if (rho <= tol) {
                     if (m >= a.r_inner - tol && m <= a.r_outer + tol) out.points.push_back(0.0);
                     return;
                   }
                   if (m <= tol) {
                     if (rho >= a.r_inner - tol && rho <= a.r_outer + tol)
                       out.arcs.push_back({rho, -std::numbers::pi, std::numbers::pi});
                     return;
                   }
                   const double outer = half_width_at_least(kappa(a.center, a.r_outer), tol);
                   if (std::isnan(outer)) return;
                   // Points strictly inside the inner disk are excluded.
                   const double k_in = kappa(a.center, a.r_inner);
                   const double inner = k_in >= 1.0 ? 0.0 : (k_in <= -1.0 ? std::numbers::pi : std::acos(k_in));
                   const double phi = std::arg(a.center);
                   if (inner > outer + tol) return;
                   if (inner <= 0.0) {
                     if (outer == 0.0) out.points.push_back(std::polar(rho, phi));
                     else out.arcs.push_back({rho, phi - outer, phi + outer});
                     return;
                   }
                   if (outer >= std::numbers::pi) {
                     out.arcs.push_back({rho, phi + inner, phi + kTwoPi - inner});
                     return;
                   }
                   const double hi = std::max(outer, inner);
                   out.arcs.push_back({rho, phi + inner, phi + hi});
                   out.arcs.push_back({rho, phi - hi, phi - inner});
                 },
                 [&](const std::vector<SpectrumDescriptor>& u) {
                   for (const auto& member : u) intersect_into(member, rho, tol, out);
                 },
             },
             d.variant());
}

}  // namespace

CircleIntersection intersect_circle(const SpectrumDescriptor& d, double rho, double tol) {
  CircleIntersection out;
  if (rho < 0.0) return out;
  intersect_into(d, rho, tol, out);
  return out;
}

std::vector<cplx> candidates_for_modulus(const SpectrumDescriptor& d, double rho, double tol,
                                         CandidateOptions opts) {
  const auto hit = intersect_circle(d, rho, tol);
  // A set, not a multiset: repeated eigenvalues give one candidate.
  std::vector<cplx> out;
  for (cplx z : hit.points) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](cplx o) { return std::abs(o - z) <= tol; });
    if (!seen) out.push_back(z);
  }
  for (const auto& arc : hit.arcs) {
    const double len = arc.end - arc.start;
    const int n = std::max(1, static_cast<int>(std::ceil(opts.arc_samples * len / kTwoPi)));
    const bool full_turn = len >= kTwoPi - 1e-12;
    const int last = full_turn ? n - 1 : n;
    for (int k = 0; k <= last; ++k) out.push_back(arc.at(arc.start + len * k / n));
  }
  return out;
}

namespace {

SpectrumDescriptor fill_holes(const SpectrumDescriptor& d) {
  return std::visit(overloaded{
                        [&](const shape::Circle& c) { return SpectrumDescriptor(shape::Disk{c.center, c.radius}); },
                        [&](const shape::Annulus& a) { return SpectrumDescriptor(shape::Disk{a.center, a.r_outer}); },
                        [&](const std::vector<SpectrumDescriptor>& u) {
                          std::vector<SpectrumDescriptor> filled;
                          int continuum = 0;
                          for (const auto& m : u) {
                            filled.push_back(fill_holes(m));
                            if (!m.is_discrete()) ++continuum;
                          }
                          // Two filled disks never enclose a bounded gap; three or more can.
                          if (continuum > 2) {
                            throw UnsupportedDescriptor(
                                "cannot derive the holes of a union with more than two continuum members");
                          }
                          std::vector<SpectrumDescriptor> merged;
                          for (std::size_t i = 0; i < filled.size(); ++i) {
                            const auto* di = std::get_if<shape::Disk>(&filled[i].variant());
                            bool covered = false;
                            for (std::size_t j = 0; j < filled.size() && di; ++j) {
                              const auto* dj = std::get_if<shape::Disk>(&filled[j].variant());
                              if (i == j || !dj) continue;
                              const bool inside = std::abs(di->center - dj->center) + di->radius <= dj->radius;
                              const bool same = di->center == dj->center && di->radius == dj->radius;
                              if (inside && (!same || j < i)) covered = true;
                            }
                            if (!covered) merged.push_back(filled[i]);
                          }
                          return merged.size() == 1 ? merged.front() : SpectrumDescriptor::make_union(merged);
                        },
                        [&](const auto&) { return d; },
                    },
                    d.variant());
}

}  // namespace

SubnormalBounds subnormal_bounds(const SpectrumDescriptor& sigma_n) {
  return {sigma_n, fill_holes(sigma_n)};
}

}  // namespace delaymargin
