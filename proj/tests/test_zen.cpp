#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "delaymargin/errors.hpp"
#include "delaymargin/zen.hpp"
#include "oracles.hpp"

using namespace delaymargin;
using std::numbers::pi;

namespace {

TestSignal scalar(std::vector<SignalTerm> terms) { return TestSignal{1, std::move(terms)}; }

SignalTerm term(cplx coeff, int power, cplx rate, int component = 0) { return {coeff, power, rate, component}; }

MeasureDescriptor delta0() { return MeasureDescriptor::dirac(0.0); }
MeasureDescriptor delta1() { return MeasureDescriptor::dirac(1.0); }
MeasureDescriptor leb01() { return MeasureDescriptor::lebesgue_on(0.0, 1.0); }
MeasureDescriptor delta0_leb() { return MeasureDescriptor::dirac(0.0) + MeasureDescriptor::lebesgue(); }

// \int_0^inf g(t) dt for smooth decaying g, independent of the library's
// quadrature. Every integrand here decays at least like e^{-t / 5}, so the
// range past t = 1e4 contributes nothing.
cplx half_line(const std::function<cplx(double)>& g) {
  boost::math::quadrature::exp_sinh<double> q;
  auto part = [&](auto pick) {
    return q.integrate([&](double t) { return t > 0.0 && t < 1e4 ? pick(g(t)) : 0.0; }, 0.0,
                       std::numeric_limits<double>::infinity());
  };
  const double re = part([](cplx v) { return v.real(); });
  const double im = part([](cplx v) { return v.imag(); });
  return {re, im};
}

CVector unit_vector(oracle::Gen& gen, int n) {
  CVector x(n);
  for (int i = 0; i < n; ++i) x(i) = gen.complex_in_box(1.0);
  return x / x.norm();
}

struct Symbol {
  RationalMatrix G;
  double sup;  // known boundary sup, or a negative value when not known
};

std::vector<Symbol> symbols() {
  const Polynomial s1{1.0, 1.0};
  std::vector<Symbol> out;
  out.push_back({RationalMatrix::scalar(Polynomial{-1.0, 1.0}, s1), 1.0});
  out.push_back({RationalMatrix::scalar(Polynomial{0.7}, Polynomial{1.0}), 0.7});
  out.push_back({RationalMatrix::scalar(Polynomial{1.0}, s1), 1.0});
  out.push_back({RationalMatrix::scalar(Polynomial{2.0, 1.0}, Polynomial{3.0, 1.0}), 1.0});
  out.push_back({RationalMatrix::scalar(Polynomial{1.0, 1.0, 1.0}, Polynomial{3.0, 2.0, 1.0}), -1.0});
  out.push_back({RationalMatrix::scalar(Polynomial{6.0, -5.0, 1.0}, Polynomial{6.0, 5.0, 1.0}), 1.0});
  out.push_back({RationalMatrix::scalar(Polynomial{1.0, 0.5}, Polynomial{4.0, 1.0}), 0.5});
  out.push_back({RationalMatrix::scalar(Polynomial{-1.5}, Polynomial{1.0}), 1.5});
  out.push_back({RationalMatrix::diagonal({{Polynomial{-1.0, 1.0}, s1}, {Polynomial{1.0}, s1}}), 1.0});
  RationalMatrix full;
  full.rows = full.cols = 2;
  full.num = {Polynomial{1.0}, Polynomial{0.5}, Polynomial{0.0, 1.0}, Polynomial{1.0}};
  full.den = {s1, Polynomial{1.0}, Polynomial{2.0, 1.0}, Polynomial{3.0, 1.0}};
  out.push_back({full, -1.0});
  out.push_back({RationalMatrix::diagonal({{Polynomial{0.3}, Polynomial{1.0}}, {Polynomial{2.0}, Polynomial{2.0, 1.0}}}),
                 1.0});
  return out;
}

TestSignal signal_for(int dim) {
  if (dim == 1) return scalar({term(1.0, 1, 1.0), term({0.0, 0.5}, 2, {2.0, 1.0})});
  return TestSignal{2, {term(1.0, 1, 1.0, 0), term(-0.5, 2, {1.5, -1.0}, 1), term(1.0, 1, 3.0, 1)}};
}

}  // namespace

TEST_CASE("doubling constants") {
  const auto grid = doubling_grid();
  CHECK(doubling_constant(delta0(), grid) == doctest::Approx(1.0));
  CHECK(doubling_constant(MeasureDescriptor::lebesgue(), grid) == doctest::Approx(2.0));
  double oracle_max = 0.0;
  for (double t : grid) oracle_max = std::max(oracle_max, (1.0 + 2.0 * t) / (1.0 + t));
  const double d = doubling_constant(delta0_leb(), grid);
  CHECK(d <= 2.0);
  CHECK(d == doctest::Approx(oracle_max).epsilon(1e-12));

  MeasureDescriptor steep;
  std::vector<double> r30(31, 0.0);
  r30[30] = 1.0;
  steep.density.push_back({0.0, 1.0, r30});
  CHECK_THROWS_AS(doubling_constant(steep, grid), NotDoubling);
}

TEST_CASE("weights") {
  const Weight hardy(delta0());
  const Weight bergman(MeasureDescriptor::lebesgue());
  const Weight shifted(delta1());
  CHECK(hardy.closed_form() == Weight::ClosedForm::Hardy);
  CHECK(bergman.closed_form() == Weight::ClosedForm::Lebesgue);
  CHECK(shifted.closed_form() == Weight::ClosedForm::ShiftedAtom);
  for (double t : {1e-3, 0.5, 1.0, 7.0}) {
    CHECK(hardy(t) == doctest::Approx(2 * pi));
    CHECK(bergman(t) == doctest::Approx(pi / t));
    CHECK(shifted(t) == doctest::Approx(2 * pi * std::exp(-2 * t)));
    // 2 pi \int_0^1 e^{-2rt} dr = pi (1 - e^{-2t}) / t
    CHECK(Weight(leb01())(t) == doctest::Approx(pi * (-std::expm1(-2 * t)) / t).epsilon(1e-12));
  }
}

TEST_CASE("property: weights are positive and nonincreasing") {
  const std::vector<MeasureDescriptor> measures = {delta0(), delta1(), leb01(), delta0_leb(),
                                                   MeasureDescriptor::dirac(2.0, 0.5) + leb01()};
  for (const auto& nu : measures) {
    const Weight w(nu);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200; ++k) {
      const double t = std::pow(10.0, -4.0 + 6.0 * k / 200.0);
      const double v = w(t);
      CHECK(v > 0.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("norm examples") {
  const TestSignal e = scalar({term(1.0, 0, 1.0)});
  const TestSignal te = scalar({term(1.0, 1, 1.0)});
  CHECK(time_norm_sq(e, Weight(delta0())) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(time_norm_sq(te, Weight(MeasureDescriptor::lebesgue())) == doctest::Approx(pi / 4).epsilon(1e-10));
  CHECK_THROWS_AS(time_norm_sq(e, Weight(MeasureDescriptor::lebesgue())), Divergent);

  CHECK(frequency_norm_sq(laplace(e), delta0()) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(frequency_norm_sq(laplace(te), MeasureDescriptor::lebesgue()) == doctest::Approx(pi / 4).epsilon(1e-10));
  CHECK_THROWS_AS(frequency_norm_sq(laplace(e), MeasureDescriptor::lebesgue()), Divergent);

  // t e^{-a t} against pi/t: pi / (4 a^2).
  const TestSignal te2 = scalar({term(1.0, 1, 2.0)});
  CHECK(time_norm_sq(te2, Weight(MeasureDescriptor::lebesgue())) == doctest::Approx(pi / 16).epsilon(1e-10));
}

TEST_CASE("isometry anchors") {
  const auto a = verify_isometry(scalar({term(1.0, 0, 1.0)}), delta0());
  CHECK(a.lhs == doctest::Approx(pi).epsilon(1e-12));
  CHECK(a.rhs == doctest::Approx(pi).epsilon(1e-12));
  CHECK(a.rel_err <= 1e-8);
  const auto b = verify_isometry(scalar({term(1.0, 1, 1.0)}), MeasureDescriptor::lebesgue());
  CHECK(b.lhs == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(b.rhs == doctest::Approx(pi / 4).epsilon(1e-12));
  CHECK(b.rel_err <= 1e-8);

  // e^{-t} e1 + t e^{-2t} e2 against delta_0: pi + 2 pi \int t^2 e^{-4t} dt = pi + pi / 16.
  const TestSignal v{2, {term(1.0, 0, 1.0, 0), term(1.0, 1, 2.0, 1)}};
  const auto c = verify_isometry(v, delta0());
  CHECK(c.lhs == doctest::Approx(pi + pi / 16).epsilon(1e-10));
  CHECK(c.rel_err <= 1e-6);
}

TEST_CASE("property: isometry suite") {
  // Signals with f(0) = 0 are needed when the measure has infinite mass.
  const std::vector<TestSignal> any = {
      scalar({term(1.0, 0, 1.0)}),
      scalar({term({1.0, -2.0}, 0, {1.0, 2.0})}),
      scalar({term({3.0, 1.0}, 0, 3.0), term(1.0, 1, 1.0)}),
      TestSignal{2, {term(1.0, 0, 1.0, 0), term(1.0, 1, 2.0, 1)}},
      scalar({term(1.0, 0, {0.5, 4.0}), term(-2.0, 3, 2.0)}),
  };
  const std::vector<TestSignal> vanishing = {
      scalar({term(1.0, 1, 1.0)}),
      scalar({term(1.0, 2, 0.5)}),
      scalar({term(1.0, 0, 1.0), term(-1.0, 0, 2.0)}),
      scalar({term({0.0, 1.0}, 1, {2.0, 1.0})}),
      TestSignal{3, {term(1.0, 1, 1.0, 0), term(1.0, 0, 1.0, 1), term(-1.0, 0, 3.0, 1), term(2.0, 4, 5.0, 2)}},
  };
  const std::vector<MeasureDescriptor> finite = {delta0(), delta1(), leb01()};
  int pairs = 0;
  for (const auto& nu : finite) {
    for (const auto* set : {&any, &vanishing}) {
      for (const auto& f : *set) {
        const auto r = verify_isometry(f, nu);
        CHECK(r.rel_err <= 1e-6);
        ++pairs;
      }
    }
  }
  for (const auto& f : vanishing) {
    const auto r = verify_isometry(f, delta0_leb());
    CHECK(r.rel_err <= 1e-6);
    ++pairs;
  }
  CHECK(pairs >= 20);
}

TEST_CASE("property: Parseval additivity over components") {
  const TestSignal v{3, {term(1.0, 1, 1.0, 0), term({0.0, 2.0}, 0, 2.0, 1), term(1.0, 2, {1.0, 3.0}, 2),
                         term(-1.0, 0, 1.0, 1)}};
  for (const auto& nu : {delta0(), delta1(), leb01()}) {
    const auto whole = verify_isometry(v, nu);
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < v.dim; ++j) {
      const auto part = verify_isometry(v.component(j), nu);
      lhs += part.lhs;
      rhs += part.rhs;
    }
    CHECK(whole.lhs == doctest::Approx(lhs).epsilon(1e-9));
    CHECK(whole.rhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("kernels") {
  const Weight hardy(delta0());
  for (double x : {0.25, 1.0, 3.0}) {
    const Kernel k = kernel({x, 0.7}, hardy);
    CHECK(k.norm_sq() == doctest::Approx(1.0 / (4 * pi * x)).epsilon(1e-9));
    CHECK(k.norm_bound() >= k.norm_sq() * (1 - 1e-12));
    CHECK(k.in_space_certified());
  }

  // Reproducing property <f, k_z> = Lf(z) for f = e^{-t}, z = 1: both 1/2.
  const TestSignal e = scalar({term(1.0, 0, 1.0)});
  const Kernel k1 = kernel(1.0, hardy);
  const cplx ip = half_line([&](double t) { return e(t)(0) * std::conj(k1(t)) * hardy(t); });
  CHECK(std::abs(ip - 0.5) < 1e-10);
  CHECK(std::abs(e.transform(1.0)(0) - 0.5) < 1e-15);

  // Same property for random points and signals, Hardy and Bergman weights.
  oracle::Gen gen(51);
  const Weight bergman(MeasureDescriptor::lebesgue());
  for (int trial = 0; trial < 20; ++trial) {
    const cplx z{gen.uniform(0.3, 3.0), gen.uniform(-3.0, 3.0)};
    const TestSignal f = scalar({term(gen.complex_in_box(1.0), gen.integer(1, 3), {gen.uniform(0.5, 2.0), 1.0})});
    for (const Weight* w : {&hardy, &bergman}) {
      const Kernel k = kernel(z, *w);
      const cplx lhs = half_line([&](double t) { return f(t)(0) * std::conj(k(t)) * (*w)(t); });
      CHECK(std::abs(lhs - f.transform(z)(0)) <= 1e-8 * (1 + std::abs(lhs)));
      // Closed-form transform against direct quadrature of the kernel.
      const cplx s{gen.uniform(0.0, 2.0), gen.uniform(-2.0, 2.0)};
      const cplx direct = half_line([&](double t) { return k(t) * std::exp(-s * t); });
      CHECK(std::abs(direct - k.transform(s)) <= 1e-8 * (1 + std::abs(direct)));
    }
  }

  // delta_1: nu[0, eps) = 0 for eps < 1, so points with Re z <= 1 are not certified.
  const Kernel far = kernel({0.5, 0.0}, Weight(delta1()));
  CHECK_FALSE(far.in_space_certified());
  CHECK_THROWS_AS(far.ensure_in_space(), KernelNotInSpace);
  CHECK(kernel({2.0, 1.0}, Weight(delta1())).in_space_certified());
  CHECK_THROWS_AS(kernel({-1.0, 0.0}, hardy), Error);
}

TEST_CASE("symbols") {
  CHECK_THROWS_AS(RationalMatrix::scalar(Polynomial{0.0, 1.0}, Polynomial{1.0}).at_infinity(), UnboundedSymbol);
  CHECK_THROWS_AS(RationalMatrix::scalar(Polynomial{1.0}, Polynomial{-1.0, 1.0}).check_bounded(), UnboundedSymbol);
  CHECK_THROWS_AS(RationalMatrix::scalar(Polynomial{1.0}, Polynomial{0.0, 1.0}).check_bounded(), UnboundedSymbol);
  for (const auto& s : symbols()) {
    if (s.sup < 0) continue;
    CHECK(boundary_sup(s.G) == doctest::Approx(s.sup).epsilon(1e-9));
  }
  // |1 / (s + 1)| peaks at w = 0; the 2x2 example is checked on a dense grid.
  const auto all = symbols();
  const auto& full = all[9].G;
  double dense = 0.0;
  for (double w = -50.0; w <= 50.0; w += 1e-3) {
    Eigen::JacobiSVD<CMatrix> svd(full(cplx{0.0, w}));
    dense = std::max(dense, svd.singularValues()(0));
  }
  CHECK(boundary_sup(full) >= dense - 1e-9);
  CHECK(boundary_sup(full) == doctest::Approx(dense).epsilon(1e-5));
}

TEST_CASE("property: multipliers are contractive up to their boundary sup") {
  int symbols_checked = 0;
  for (const auto& s : symbols()) {
    const Transform F = laplace(signal_for(s.G.cols));
    for (const auto& nu : {delta0(), MeasureDescriptor::lebesgue()}) {
      const auto r = verify_multiplier(s.G, F, nu, {});
      CHECK(r.ratio <= r.sup_G + 1e-6);
    }
    ++symbols_checked;
  }
  CHECK(symbols_checked >= 10);

  // A constant multiplier scales the norm exactly.
  const auto c = verify_multiplier(RationalMatrix::scalar(Polynomial{0.7}, Polynomial{1.0}),
                                   laplace(signal_for(1)), delta0(), {});
  CHECK(c.ratio == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("property: adjoint identity on reproducing kernels") {
  oracle::Gen gen(52);
  int samples = 0;
  const auto all = symbols();
  for (std::size_t k = 0; k < all.size(); ++k) {
    const auto& G = all[k].G;
    const Transform F = laplace(signal_for(G.cols));
    // delta_1 kernels need Re z > 1 to lie in the space.
    const MeasureDescriptor nu = k % 3 == 0 ? delta0() : (k % 3 == 1 ? MeasureDescriptor::lebesgue() : delta1());
    const double min_re = k % 3 == 2 ? 1.2 : 0.2;
    std::vector<AdjointSample> batch;
    for (int j = 0; j < 5; ++j)
      batch.push_back({{gen.uniform(min_re, 3.0), gen.uniform(-3.0, 3.0)}, unit_vector(gen, G.rows)});
    const auto r = verify_multiplier(G, F, nu, batch);
    CHECK(r.adjoint_residual <= 1e-6);
    samples += static_cast<int>(batch.size());
  }
  CHECK(samples >= 50);
}

TEST_CASE("diagonal example") {
  const auto G = RationalMatrix::diagonal({{Polynomial{-1.0, 1.0}, Polynomial{1.0, 1.0}},
                                           {Polynomial{1.0}, Polynomial{1.0, 1.0}}});
  const TestSignal f{2, {term(1.0, 0, 1.0, 1)}};
  oracle::Gen gen(53);
  std::vector<AdjointSample> batch;
  for (int j = 0; j < 5; ++j) batch.push_back({{gen.uniform(0.2, 3.0), gen.uniform(-3.0, 3.0)}, unit_vector(gen, 2)});
  const auto r = verify_multiplier(G, laplace(f), delta0(), batch);
  // ||F / (s + 1)||^2 = \int dy / (1 + y^2)^2 = pi / 2 against ||F||^2 = pi.
  CHECK(r.ratio == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(r.ratio <= 1.0);
  CHECK(r.adjoint_residual <= 1e-6);
}

TEST_CASE("property: norm attainment direction") {
  oracle::Gen gen(54);
  const auto all = symbols();
  for (const auto& nu : {delta0(), MeasureDescriptor::lebesgue(), delta1()}) {
    const Weight w(nu);
    for (int trial = 0; trial < 6; ++trial) {
      const auto& G = all[static_cast<std::size_t>(trial) % all.size()].G;
      const double min_re = nu.atoms.empty() || nu.atoms.front().location == 0.0 ? 0.2 : 1.2;
      const cplx z{gen.uniform(min_re, 3.0), gen.uniform(-3.0, 3.0)};
      const CVector x = unit_vector(gen, G.rows);
      const Kernel k = kernel(z, w);
      const CVector gx = G(z).adjoint() * x;
      const double top = frequency_norm_sq(k.as_transform(gx), nu);
      const double bottom = frequency_norm_sq(k.as_transform(x), nu);
      CHECK(std::sqrt(top / bottom) == doctest::Approx(gx.norm()).epsilon(1e-6));
    }
  }
}

TEST_CASE("Blaschke factor attains its norm") {
  const auto B = RationalMatrix::scalar(Polynomial{-1.0, 1.0}, Polynomial{1.0, 1.0});
  // Unit modulus on the axis: exact for the Hardy measure.
  const auto a = verify_multiplier(B, laplace(scalar({term(1.0, 0, 1.0)})), delta0(), {});
  CHECK(a.ratio >= 1.0 - 1e-3);
  // For the Bergman measure, F concentrated at large |s| where |B| -> 1.
  const auto b = verify_multiplier(B, laplace(scalar({term(1.0, 1, 1e4)})), MeasureDescriptor::lebesgue(), {});
  CHECK(b.ratio >= 1.0 - 1e-3);
  CHECK(b.ratio <= 1.0 + 1e-6);
}
