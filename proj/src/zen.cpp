#include "delaymargin/zen.hpp"

#include <algorithm>
#include <numbers>

#include <Eigen/SVD>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "delaymargin/detail/golden.hpp"
#include "delaymargin/errors.hpp"

namespace delaymargin {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int k) { return boost::math::factorial<double>(static_cast<unsigned>(k)); }

// \int_a^b r^k e^{-beta r} dr
double exp_moment(int k, double a, double b, double beta) {
  if (beta * b < 1e-2) {
    double sum = 0.0;
    double term = 1.0;  // (-beta)^j / j!
    for (int j = 0; j < 40; ++j) {
      const int e = k + j + 1;
      sum += term * (std::pow(b, e) - std::pow(a, e)) / e;
      term *= -beta / (j + 1);
    }
    return sum;
  }
  const double scale = factorial(k) / std::pow(beta, k + 1);
  const double order = k + 1.0;
  if (beta * a > order) {
    return scale * (boost::math::gamma_q(order, beta * a) - boost::math::gamma_q(order, beta * b));
  }
  return scale * (boost::math::gamma_p(order, beta * b) - boost::math::gamma_p(order, beta * a));
}

double poly_integral(const std::vector<double>& p, double a, double b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double e = static_cast<double>(k + 1);
    sum += p[k] * (std::pow(b, e) - std::pow(a, e)) / e;
  }
  return sum;
}

// \int \int g(x + iy) d nu(x) dy for g real or complex valued.
template <class Fn>
auto measure_integral(Fn&& g, const MeasureDescriptor& nu, double scale, const ZenQuadConfig& cfg) {
  using Result = decltype(g(cplx{}));
  auto line = [&](double x) -> Result {
    const double c = scale + x;
    if constexpr (std::is_same_v<Result, double>) {
      return integrate_line([&](double y) { return g(cplx{x, y}); }, c, cfg.inner).value;
    } else {
      return integrate_line_complex([&](double y) { return g(cplx{x, y}); }, c, cfg.inner);
    }
  };
  Result total{};
  for (const auto& atom : nu.atoms) total += atom.mass * line(atom.location);
  for (const auto& piece : nu.density) {
    auto f = [&](double x) { return piece(x) * line(x); };
    if constexpr (std::is_same_v<Result, double>) total += integrate(f, piece.from, piece.to, cfg.outer).value;
    else total += integrate_complex(f, piece.from, piece.to, cfg.outer);
  }
  if (nu.tail) {
    const double v = nu.tail->value;
    if constexpr (std::is_same_v<Result, double>) {
      total += v * integrate_half_line(line, nu.tail->from, scale, cfg.outer).value;
    } else {
      const auto re = integrate_half_line([&](double x) { return line(x).real(); }, nu.tail->from, scale, cfg.outer);
      const auto im = integrate_half_line([&](double x) { return line(x).imag(); }, nu.tail->from, scale, cfg.outer);
      total += v * cplx{re.value, im.value};
    }
  }
  return total;
}

}  // namespace

double DensityPiece::operator()(double r) const {
  double acc = 0.0;
  for (auto it = poly.rbegin(); it != poly.rend(); ++it) acc = acc * r + *it;
  return acc;
}

MeasureDescriptor MeasureDescriptor::dirac(double location, double mass) {
  return {{{location, mass}}, {}, std::nullopt};
}

MeasureDescriptor MeasureDescriptor::lebesgue() { return {{}, {}, LebesgueTail{0.0, 1.0}}; }

MeasureDescriptor MeasureDescriptor::lebesgue_on(double from, double to) {
  return {{}, {{from, to, {1.0}}}, std::nullopt};
}

MeasureDescriptor MeasureDescriptor::operator+(const MeasureDescriptor& other) const {
  MeasureDescriptor out = *this;
  out.atoms.insert(out.atoms.end(), other.atoms.begin(), other.atoms.end());
  std::sort(out.atoms.begin(), out.atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  out.density.insert(out.density.end(), other.density.begin(), other.density.end());
  if (other.tail) {
    if (out.tail) throw Error("cannot add two tails with different starts");
    out.tail = other.tail;
  }
  return out;
}

double MeasureDescriptor::mass_below(double t) const {
  double sum = 0.0;
  for (const auto& a : atoms)
    if (a.location < t) sum += a.mass;
  for (const auto& p : density)
    if (t > p.from) sum += poly_integral(p.poly, p.from, std::min(t, p.to));
  if (tail && t > tail->from) sum += tail->value * (t - tail->from);
  return sum;
}

void MeasureDescriptor::validate() const {
  double prev = -kInf;
  for (const auto& a : atoms) {
    if (!(a.location >= 0.0) || !std::isfinite(a.location)) throw Error("atom location must be finite and >= 0");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw Error("atom mass must be finite and > 0");
    if (a.location < prev) throw Error("atom locations must be sorted");
    prev = a.location;
  }
  for (const auto& p : density) {
    if (!(p.from >= 0.0 && p.from < p.to) || !std::isfinite(p.to)) throw Error("density piece needs 0 <= from < to < inf");
    if (p.poly.empty()) throw Error("density piece needs coefficients");
    for (int k = 0; k <= 64; ++k) {
      if (p(p.from + (p.to - p.from) * k / 64.0) < 0.0) throw Error("density must be nonnegative");
    }
  }
  if (tail) {
    if (!(tail->from >= 0.0) || !std::isfinite(tail->from)) throw Error("tail start must be finite and >= 0");
    if (!(tail->value > 0.0) || !std::isfinite(tail->value)) throw DivergentWeight("tail density must be finite and > 0");
  }
  if (atoms.empty() && density.empty() && !tail) throw Error("measure is zero");
}

std::vector<double> doubling_grid(int points) {
  points = std::max(points, 2);
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = std::pow(10.0, -6.0 + 12.0 * k / (points - 1));
  return out;
}

double doubling_constant(const MeasureDescriptor& nu, const std::vector<double>& t_grid, double cap) {
  double worst = 0.0;
  for (double t : t_grid) {
    const double below = nu.mass_below(t);
    if (below <= 0.0) continue;
    worst = std::max(worst, nu.mass_below(2.0 * t) / below);
  }
  if (worst > cap) throw NotDoubling("doubling ratio " + std::to_string(worst) + " exceeds cap");
  return worst;
}

Weight::Weight(MeasureDescriptor nu) : nu_(std::move(nu)) {
  nu_.validate();
  if (nu_.atoms.size() == 1 && nu_.density.empty() && !nu_.tail) {
    closed_ = nu_.atoms.front().location == 0.0 ? ClosedForm::Hardy : ClosedForm::ShiftedAtom;
  } else if (nu_.atoms.empty() && nu_.density.empty() && nu_.tail && nu_.tail->from == 0.0) {
    closed_ = ClosedForm::Lebesgue;
  } else {
    closed_ = ClosedForm::General;
  }
}

double Weight::operator()(double t) const {
  if (!(t > 0.0)) throw Error("weight evaluated at t <= 0");
  const double beta = 2.0 * t;
  double sum = 0.0;
  for (const auto& a : nu_.atoms) sum += a.mass * std::exp(-beta * a.location);
  for (const auto& p : nu_.density)
    for (std::size_t k = 0; k < p.poly.size(); ++k)
      if (p.poly[k] != 0.0) sum += p.poly[k] * exp_moment(static_cast<int>(k), p.from, p.to, beta);
  if (nu_.tail) sum += nu_.tail->value * std::exp(-beta * nu_.tail->from) / beta;
  return 2.0 * kPi * sum;
}

Weight weight_from_measure(const MeasureDescriptor& nu) { return Weight(nu); }

CVector TestSignal::operator()(double t) const {
  CVector v = CVector::Zero(dim);
  for (const auto& term : terms) v(term.component) += term.coeff * std::pow(t, term.power) * std::exp(-term.rate * t);
  return v;
}

CVector TestSignal::transform(cplx s) const {
  CVector v = CVector::Zero(dim);
  for (const auto& term : terms)
    v(term.component) += term.coeff * factorial(term.power) / std::pow(s + term.rate, term.power + 1);
  return v;
}

CVector TestSignal::initial_value() const {
  CVector v = CVector::Zero(dim);
  for (const auto& term : terms)
    if (term.power == 0) v(term.component) += term.coeff;
  return v;
}

TestSignal TestSignal::component(int j) const {
  TestSignal out{1, {}};
  for (auto term : terms) {
    if (term.component != j) continue;
    term.component = 0;
    out.terms.push_back(term);
  }
  return out;
}

void TestSignal::validate() const {
  if (dim < 1) throw Error("signal dimension must be >= 1");
  for (const auto& term : terms) {
    if (term.component < 0 || term.component >= dim) throw Error("signal term component out of range");
    if (term.power < 0) throw Error("signal term power must be >= 0");
    if (!(term.rate.real() > 0.0)) throw Divergent("signal term rate must have positive real part");
  }
}

Transform laplace(const TestSignal& f) {
  f.validate();
  double scale = 1.0;
  for (const auto& term : f.terms) scale = std::max(scale, std::abs(term.rate));
  return {f.dim, [f](cplx s) { return f.transform(s); }, f.initial_value(), scale};
}

double time_norm_sq(const TestSignal& f, const Weight& w, const ZenQuadConfig& cfg) {
  f.validate();
  if (f.terms.empty()) return 0.0;
  if (w.measure().infinite_mass() && f.initial_value().norm() > 0.0) {
    throw Divergent("weight grows like 1/t at 0 while f(0) != 0");
  }

  double alpha = kInf;
  int max_power = 0;
  double coeff_sum = 0.0;
  for (const auto& term : f.terms) {
    alpha = std::min(alpha, term.rate.real());
    max_power = std::max(max_power, term.power);
    coeff_sum += std::abs(term.coeff);
  }
  // For t >= T >= 1: ||f(t)||^2 w(t) <= w(T) C^2 t^{2M} e^{-2 alpha t}.
  auto tail_bound = [&](double T) {
    const double order = 2.0 * max_power + 1.0;
    return w(T) * coeff_sum * coeff_sum * boost::math::tgamma(order, 2.0 * alpha * T) /
           std::pow(2.0 * alpha, order);
  };
  auto integrand = [&](double t) { return f(t).squaredNorm() * w(t); };

  double T = std::max(1.0, 1.0 / alpha);
  for (int attempt = 0; attempt < 60; ++attempt, T *= 2.0) {
    double value = 0.0;
    double lo = 0.0;
    for (double hi = T / 64.0; hi <= T * (1.0 + 1e-12); hi *= 2.0) {
      value += integrate(integrand, lo, hi, cfg.outer).value;
      lo = hi;
    }
    if (tail_bound(T) <= 1e-2 * cfg.outer.tol * std::abs(value)) return value;
  }
  throw Divergent("time-domain tail bound did not settle");
}

double frequency_norm_sq(const Transform& F, const MeasureDescriptor& nu, const ZenQuadConfig& cfg) {
  nu.validate();
  if (nu.infinite_mass() && F.tail_coefficient.size() > 0 && F.tail_coefficient.norm() > 0.0) {
    throw Divergent("transform decays like 1/s against a measure of infinite mass");
  }
  return measure_integral([&](cplx s) { return F.eval(s).squaredNorm(); }, nu, F.scale, cfg);
}

cplx frequency_inner(const Transform& F, const Transform& G, const MeasureDescriptor& nu, const ZenQuadConfig& cfg) {
  nu.validate();
  if (F.dim != G.dim) throw Error("inner product of transforms with different dimensions");
  if (nu.infinite_mass() && F.tail_coefficient.norm() > 0.0 && G.tail_coefficient.norm() > 0.0) {
    throw Divergent("both transforms decay like 1/s against a measure of infinite mass");
  }
  return measure_integral([&](cplx s) { return G.eval(s).dot(F.eval(s)); }, nu, std::max(F.scale, G.scale), cfg);
}

IsometryCheck verify_isometry(const TestSignal& f, const MeasureDescriptor& nu, const ZenQuadConfig& cfg) {
  const double lhs = time_norm_sq(f, weight_from_measure(nu), cfg);
  const double rhs = frequency_norm_sq(laplace(f), nu, cfg);
  const double denom = std::max(lhs, rhs);
  return {lhs, rhs, denom > 0.0 ? std::abs(lhs - rhs) / denom : 0.0};
}

Kernel::Kernel(cplx z, Weight w) : z_(z), w_(std::move(w)), norm_bound_(kInf) {
  if (!(z.real() > 0.0)) throw Error("kernel point must lie in the open right half-plane");
  // w(t) >= 2 pi nu[0, eps) e^{-2 eps t}  gives  ||k_z||^2 <= 1 / (4 pi nu[0, eps) (Re z - eps)).
  const double x = z.real();
  for (int k = 1; k <= 52; ++k) {
    const double eps = x * (1.0 - std::ldexp(1.0, -k));
    const double mass = w_.measure().mass_below(eps);
    if (mass > 0.0) norm_bound_ = std::min(norm_bound_, 1.0 / (4.0 * kPi * mass * (x - eps)));
  }
}

cplx Kernel::operator()(double t) const { return std::exp(-std::conj(z_) * t) / w_(t); }

void Kernel::ensure_in_space() const {
  if (!in_space_certified()) throw KernelNotInSpace("nu[0, eps) = 0 for every eps < Re z");
}

cplx Kernel::transform(cplx s) const {
  const auto& nu = w_.measure();
  const cplx shifted = s + std::conj(z_);
  switch (w_.closed_form()) {
    case Weight::ClosedForm::Hardy:
      return 1.0 / (2.0 * kPi * nu.atoms.front().mass * shifted);
    case Weight::ClosedForm::ShiftedAtom:
      return 1.0 / (2.0 * kPi * nu.atoms.front().mass * (shifted - 2.0 * nu.atoms.front().location));
    case Weight::ClosedForm::Lebesgue:
      return 1.0 / (kPi * nu.tail->value * shifted * shifted);
    case Weight::ClosedForm::General:
      break;
  }
  const double decay = std::max(shifted.real(), 1e-3);
  QuadConfig cfg{1e-12, 18};
  const auto re = integrate_half_line([&](double t) { return (std::exp(-shifted * t) / w_(t)).real(); }, 0.0,
                                      1.0 / decay, cfg);
  const auto im = integrate_half_line([&](double t) { return (std::exp(-shifted * t) / w_(t)).imag(); }, 0.0,
                                      1.0 / decay, cfg);
  return {re.value, im.value};
}

double Kernel::norm_sq(const QuadConfig& cfg) const {
  const double x = z_.real();
  return integrate_half_line([&](double t) { return std::exp(-2.0 * x * t) / w_(t); }, 0.0, 1.0 / x, cfg).value;
}

Transform Kernel::as_transform(const CVector& direction) const {
  const auto& nu = w_.measure();
  // lim s K_z(s) = 1 / w(0+) = 1 / (2 pi nu[0, inf)).
  double total = 0.0;
  for (const auto& a : nu.atoms) total += a.mass;
  for (const auto& p : nu.density) total += poly_integral(p.poly, p.from, p.to);
  const CVector tail = nu.infinite_mass() ? CVector(CVector::Zero(direction.size()))
                                          : CVector(direction / (2.0 * kPi * total));
  Kernel self = *this;
  return {static_cast<int>(direction.size()),
          [self, direction](cplx s) { return CVector(self.transform(s) * direction); }, tail,
          1.0 + std::abs(z_)};
}

Kernel kernel(cplx z, const Weight& w) { return Kernel(z, w); }

RationalMatrix RationalMatrix::scalar(Polynomial num, Polynomial den) {
  return {1, 1, {std::move(num)}, {std::move(den)}};
}

RationalMatrix RationalMatrix::diagonal(std::vector<std::pair<Polynomial, Polynomial>> entries) {
  const int n = static_cast<int>(entries.size());
  RationalMatrix g{n, n, std::vector<Polynomial>(entries.size() * entries.size()),
                   std::vector<Polynomial>(entries.size() * entries.size(), Polynomial{1.0})};
  for (int i = 0; i < n; ++i) {
    g.num[static_cast<std::size_t>(i * n + i)] = entries[static_cast<std::size_t>(i)].first;
    g.den[static_cast<std::size_t>(i * n + i)] = entries[static_cast<std::size_t>(i)].second;
  }
  return g;
}

CMatrix RationalMatrix::operator()(cplx s) const {
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      m(i, j) = num[k].is_zero() ? cplx{} : num[k](s) / den[k](s);
    }
  return m;
}

CMatrix RationalMatrix::at_infinity() const {
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      if (num[k].degree() > den[k].degree()) throw UnboundedSymbol("improper rational entry");
      m(i, j) = num[k].degree() == den[k].degree() && !num[k].is_zero() ? num[k].leading() / den[k].leading()
                                                                          : cplx{};
    }
  return m;
}

void RationalMatrix::check_bounded(double tol) const {
  if (rows < 1 || cols < 1 || num.size() != static_cast<std::size_t>(rows * cols) || den.size() != num.size()) {
    throw Error("rational matrix shape mismatch");
  }
  at_infinity();
  for (std::size_t k = 0; k < den.size(); ++k) {
    if (den[k].is_zero()) throw UnboundedSymbol("zero denominator");
    if (num[k].is_zero() || den[k].degree() < 1) continue;
    for (const auto& r : roots(den[k], tol).roots) {
      // A pole cancelled by the numerator is removable.
      if (std::abs(num[k](r.value)) <= 1e3 * tol * num[k].magnitude_at(std::abs(r.value))) continue;
      if (r.value.real() >= -tol) {
        throw UnboundedSymbol("pole in the closed right half-plane at " + std::to_string(r.value.real()) + " + " +
                              std::to_string(r.value.imag()) + "i");
      }
    }
  }
}

double boundary_sup(const RationalMatrix& G, int grid_points) {
  double scale = 1.0;
  for (const auto& d : G.den)
    for (cplx c : d.coeffs()) scale = std::max(scale, std::abs(c / d.leading()));
  auto norm_at = [&](double theta) {
    const CMatrix m = G(cplx{0.0, scale * std::tan(theta)});
    return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
  };
  const double half = 0.5 * kPi;
  double best = Eigen::JacobiSVD<CMatrix>(G.at_infinity()).singularValues()(0);
  const int n = std::max(5, grid_points);
  std::vector<double> thetas(static_cast<std::size_t>(n));
  std::vector<double> values(thetas.size());
  for (int k = 0; k < n; ++k) {
    thetas[static_cast<std::size_t>(k)] = -half + kPi * (k + 0.5) / n;
    values[static_cast<std::size_t>(k)] = norm_at(thetas[static_cast<std::size_t>(k)]);
  }
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    best = std::max(best, values[i]);
    const bool peak = (i == 0 || values[i] >= values[i - 1]) && (i + 1 == values.size() || values[i] >= values[i + 1]);
    if (!peak) continue;
    const double a = i == 0 ? -half : thetas[i - 1];
    const double b = i + 1 == thetas.size() ? half : thetas[i + 1];
    const auto r = detail::golden_minimize([&](double t) { return -norm_at(t); }, a, b, 1e-14, 0.0);
    best = std::max(best, -r.value);
  }
  return best;
}

Transform multiply(const RationalMatrix& G, const Transform& F) {
  if (G.cols != F.dim) throw Error("symbol and transform dimensions do not match");
  double scale = F.scale;
  for (const auto& d : G.den)
    for (cplx c : d.coeffs()) scale = std::max(scale, std::abs(c / d.leading()));
  return {G.rows, [G, F](cplx s) { return CVector(G(s) * F.eval(s)); }, CVector(G.at_infinity() * F.tail_coefficient),
          scale};
}

MultiplierCheck verify_multiplier(const RationalMatrix& G, const Transform& F, const MeasureDescriptor& nu,
                                  const std::vector<AdjointSample>& samples, const ZenQuadConfig& cfg) {
  G.check_bounded();
  MultiplierCheck out{};
  out.sup_G = boundary_sup(G);
  const Transform gf = multiply(G, F);
  const double norm_f = frequency_norm_sq(F, nu, cfg);
  const double norm_gf = frequency_norm_sq(gf, nu, cfg);
  out.ratio = norm_f > 0.0 ? std::sqrt(norm_gf / norm_f) : 0.0;

  const Weight w = weight_from_measure(nu);
  for (const auto& sample : samples) {
    if (sample.x.size() != G.rows) throw Error("adjoint sample direction has the wrong dimension");
    const Kernel k = kernel(sample.z, w);
    k.ensure_in_space();
    const cplx lhs = frequency_inner(gf, k.as_transform(sample.x), nu, cfg);
    const CVector gstar_x = G(sample.z).adjoint() * sample.x;
    const cplx rhs = gstar_x.dot(F.eval(sample.z));
    // Cauchy-Schwarz: |<GF, K_z x>| <= ||GF|| ||K_z|| ||x||, with ||K_z||^2 = K_z(z).
    const double bound = std::sqrt(norm_gf) * std::sqrt(std::abs(k.transform(sample.z))) * sample.x.norm();
    const double scale = std::max(bound, 1e-300);
    out.adjoint_residual = std::max(out.adjoint_residual, std::abs(lhs - rhs) / scale);
  }
  return out;
}

}  // namespace delaymargin
