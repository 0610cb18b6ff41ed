#include "delaymargin/problem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "delaymargin/errors.hpp"

namespace delaymargin::cli {

namespace {

const std::set<std::string> kKinds = {"margin", "hinf", "zen-verify", "neutral-demo", "unbounded-demo"};

// Collects diagnostics while walking a document. Every check returns whether
// the value is usable so callers can skip dependent checks.
class Checker {
 public:
  explicit Checker(std::vector<Diagnostic>& out) : out_(out) {}

  void fail(const std::string& path, const std::string& msg) { out_.push_back({path, msg}); }

  bool object(const json& v, const std::string& path) {
    if (v.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  bool real(const json& v, const std::string& path) {
    if (v.is_number()) return true;
    fail(path, "expected a number");
    return false;
  }

  bool positive(const json& v, const std::string& path) {
    if (!real(v, path)) return false;
    if (parse_real(v) > 0.0) return true;
    fail(path, "must be > 0");
    return false;
  }

  bool nonnegative(const json& v, const std::string& path) {
    if (!real(v, path)) return false;
    if (parse_real(v) >= 0.0 && std::isfinite(parse_real(v))) return true;
    fail(path, "must be finite and >= 0");
    return false;
  }

  bool integer(const json& v, const std::string& path, long lo, long hi) {
    if (!v.is_number_integer()) {
      fail(path, "expected an integer");
      return false;
    }
    const long x = v.get<long>();
    if (x < lo || x > hi) {
      fail(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return false;
    }
    return true;
  }

  bool complex(const json& v, const std::string& path) {
    if (v.is_number()) return true;
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return true;
    fail(path, "expected a complex number [re, im] or a real number");
    return false;
  }

  bool complex_array(const json& v, const std::string& path, bool nonempty) {
    if (!v.is_array()) {
      fail(path, "expected an array");
      return false;
    }
    if (nonempty && v.empty()) {
      fail(path, "must not be empty");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) ok = complex(v[i], path + "[" + std::to_string(i) + "]") && ok;
    return ok;
  }

  bool polynomial(const json& v, const std::string& path) {
    if (!complex_array(v, path, true)) return false;
    for (const auto& c : v) {
      if (parse_complex(c) != cplx{}) return true;
    }
    fail(path, "polynomial is identically zero");
    return false;
  }

  const json* field(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (obj.contains(key)) return &obj.at(key);
    if (required) fail(join(path, key), "missing required field");
    return nullptr;
  }

  void unknown_fields(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
      bool known = false;
      for (const char* a : allowed) known = known || key == a;
      if (!known) fail(join(path, key), "unknown field");
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  static double parse_real(const json& v) { return v.get<double>(); }

  void spectrum(const json& v, const std::string& path) {
    if (!object(v, path)) return;
    const json* type = field(v, "type", path, true);
    if (!type) return;
    if (!type->is_string()) {
      fail(join(path, "type"), "expected a string");
      return;
    }
    const auto t = type->get<std::string>();
    if (t == "points") {
      unknown_fields(v, path, {"type", "values"});
      if (const json* x = field(v, "values", path, true)) complex_array(*x, join(path, "values"), true);
    } else if (t == "matrix") {
      unknown_fields(v, path, {"type", "entries"});
      const json* e = field(v, "entries", path, true);
      if (!e) return;
      const auto epath = join(path, "entries");
      if (!e->is_array() || e->empty()) {
        fail(epath, "expected a nonempty array of rows");
        return;
      }
      for (std::size_t i = 0; i < e->size(); ++i) {
        const auto rpath = epath + "[" + std::to_string(i) + "]";
        if (!complex_array((*e)[i], rpath, true)) continue;
        if ((*e)[i].size() != e->size()) fail(rpath, "matrix must be square");
      }
    } else if (t == "disk" || t == "circle") {
      unknown_fields(v, path, {"type", "center", "radius"});
      if (const json* c = field(v, "center", path, true)) complex(*c, join(path, "center"));
      if (const json* r = field(v, "radius", path, true)) positive(*r, join(path, "radius"));
    } else if (t == "annulus") {
      unknown_fields(v, path, {"type", "center", "r_inner", "r_outer"});
      if (const json* c = field(v, "center", path, true)) complex(*c, join(path, "center"));
      const json* a = field(v, "r_inner", path, true);
      const json* b = field(v, "r_outer", path, true);
      const bool ok_a = a && nonnegative(*a, join(path, "r_inner"));
      const bool ok_b = b && positive(*b, join(path, "r_outer"));
      if (ok_a && ok_b && !(parse_real(*a) < parse_real(*b))) fail(join(path, "r_inner"), "must be < r_outer");
    } else if (t == "union") {
      unknown_fields(v, path, {"type", "members"});
      const json* m = field(v, "members", path, true);
      if (!m) return;
      if (!m->is_array() || m->empty()) {
        fail(join(path, "members"), "expected a nonempty array");
        return;
      }
      for (std::size_t i = 0; i < m->size(); ++i) spectrum((*m)[i], join(path, "members") + "[" + std::to_string(i) + "]");
    } else {
      fail(join(path, "type"), "unknown spectrum type '" + t + "' (points, matrix, disk, circle, annulus, union)");
    }
  }

  void system(const json& v, const std::string& path, const std::string& kind) {
    if (!object(v, path)) return;
    unknown_fields(v, path, {"P", "Q", "spectrum", "norm_A", "h", "h_max", "subnormal"});
    const json* p = field(v, "P", path, true);
    const json* q = field(v, "Q", path, true);
    const bool ok_p = p && polynomial(*p, join(path, "P"));
    const bool ok_q = q && complex_array(*q, join(path, "Q"), true);
    if (const json* s = field(v, "spectrum", path, true)) spectrum(*s, join(path, "spectrum"));
    if (const json* n = field(v, "norm_A", path, false)) positive(*n, join(path, "norm_A"));
    if (const json* h = field(v, "h", path, kind == "hinf")) nonnegative(*h, join(path, "h"));
    if (const json* h = field(v, "h_max", path, false)) positive(*h, join(path, "h_max"));
    if (const json* s = field(v, "subnormal", path, false); s && !s->is_boolean()) {
      fail(join(path, "subnormal"), "expected a boolean");
    }
    if (ok_p && ok_q) {
      for (const char* key : {"P", "Q"}) {
        for (const auto& c : v.at(key)) {
          if (parse_complex(c).imag() != 0.0) {
            fail(join(path, key), "coefficients must be real");
            break;
          }
        }
      }
      const Polynomial P = parse_polynomial(*p);
      const Polynomial Q = parse_polynomial(*q);
      if (P.degree() <= Q.degree()) fail(join(path, "P"), RetardedAssumptionViolated(P.degree(), Q.degree()).what());
    }
  }

  void options(const json& v, const std::string& path) {
    if (!object(v, path)) return;
    unknown_fields(v, path, {"tol", "arc_samples", "omega_grid", "boundary_samples", "grid_points",
                             "max_refine_iterations", "quad_tol"});
    if (const json* x = field(v, "tol", path, false)) positive(*x, join(path, "tol"));
    if (const json* x = field(v, "quad_tol", path, false)) positive(*x, join(path, "quad_tol"));
    if (const json* x = field(v, "arc_samples", path, false)) integer(*x, join(path, "arc_samples"), 8, 1 << 20);
    if (const json* x = field(v, "omega_grid", path, false)) integer(*x, join(path, "omega_grid"), 3, 1 << 22);
    if (const json* x = field(v, "boundary_samples", path, false))
      integer(*x, join(path, "boundary_samples"), 1, 1 << 16);
    if (const json* x = field(v, "grid_points", path, false)) integer(*x, join(path, "grid_points"), 3, 1 << 22);
    if (const json* x = field(v, "max_refine_iterations", path, false))
      integer(*x, join(path, "max_refine_iterations"), 1, 10000);
  }

  void measure(const json& v, const std::string& path) {
    if (!object(v, path)) return;
    unknown_fields(v, path, {"atoms", "density", "tail"});
    bool any = false;
    if (const json* a = field(v, "atoms", path, false)) {
      const auto apath = join(path, "atoms");
      if (!a->is_array()) {
        fail(apath, "expected an array");
      } else {
        for (std::size_t i = 0; i < a->size(); ++i) {
          const auto ip = apath + "[" + std::to_string(i) + "]";
          if (!object((*a)[i], ip)) continue;
          unknown_fields((*a)[i], ip, {"location", "mass"});
          if (const json* x = field((*a)[i], "location", ip, true)) nonnegative(*x, join(ip, "location"));
          if (const json* x = field((*a)[i], "mass", ip, true)) positive(*x, join(ip, "mass"));
          any = true;
        }
      }
    }
    if (const json* d = field(v, "density", path, false)) {
      const auto dpath = join(path, "density");
      if (!d->is_array()) {
        fail(dpath, "expected an array");
      } else {
        for (std::size_t i = 0; i < d->size(); ++i) {
          const auto ip = dpath + "[" + std::to_string(i) + "]";
          if (!object((*d)[i], ip)) continue;
          unknown_fields((*d)[i], ip, {"from", "to", "poly"});
          const json* from = field((*d)[i], "from", ip, true);
          const json* to = field((*d)[i], "to", ip, true);
          const bool ok_from = from && nonnegative(*from, join(ip, "from"));
          const bool ok_to = to && nonnegative(*to, join(ip, "to"));
          if (ok_from && ok_to && !(parse_real(*from) < parse_real(*to))) fail(join(ip, "to"), "must be > from");
          if (const json* p = field((*d)[i], "poly", ip, true)) {
            if (!p->is_array() || p->empty()) {
              fail(join(ip, "poly"), "expected a nonempty array of reals");
            } else {
              for (std::size_t k = 0; k < p->size(); ++k)
                real((*p)[k], join(ip, "poly") + "[" + std::to_string(k) + "]");
            }
          }
          any = true;
        }
      }
    }
    if (const json* t = field(v, "tail", path, false)) {
      const auto tpath = join(path, "tail");
      if (object(*t, tpath)) {
        unknown_fields(*t, tpath, {"from", "value"});
        if (const json* x = field(*t, "from", tpath, false)) nonnegative(*x, join(tpath, "from"));
        if (const json* x = field(*t, "value", tpath, false)) positive(*x, join(tpath, "value"));
        any = true;
      }
    }
    if (!any) fail(path, "measure needs at least one of atoms, density, tail");
  }

  int signal(const json& v, const std::string& path) {
    if (!object(v, path)) return -1;
    unknown_fields(v, path, {"dim", "terms"});
    int dim = 1;
    if (const json* d = field(v, "dim", path, false)) {
      if (!integer(*d, join(path, "dim"), 1, 8)) return -1;
      dim = d->get<int>();
    }
    const json* terms = field(v, "terms", path, true);
    if (!terms) return -1;
    const auto tpath = join(path, "terms");
    if (!terms->is_array() || terms->empty()) {
      fail(tpath, "expected a nonempty array");
      return -1;
    }
    for (std::size_t i = 0; i < terms->size(); ++i) {
      const auto ip = tpath + "[" + std::to_string(i) + "]";
      const json& t = (*terms)[i];
      if (!object(t, ip)) continue;
      unknown_fields(t, ip, {"coeff", "power", "rate", "component"});
      if (const json* x = field(t, "coeff", ip, true)) complex(*x, join(ip, "coeff"));
      if (const json* x = field(t, "power", ip, false)) integer(*x, join(ip, "power"), 0, 20);
      if (const json* x = field(t, "component", ip, false)) integer(*x, join(ip, "component"), 0, dim - 1);
      if (const json* x = field(t, "rate", ip, true); x && complex(*x, join(ip, "rate"))) {
        if (!(parse_complex(*x).real() > 0.0)) fail(join(ip, "rate"), "real part must be > 0");
      }
    }
    return dim;
  }

  std::pair<int, int> symbol(const json& v, const std::string& path) {
    if (!object(v, path)) return {-1, -1};
    unknown_fields(v, path, {"rows", "cols", "num", "den"});
    int rows = 1, cols = 1;
    if (const json* r = field(v, "rows", path, false)) {
      if (!integer(*r, join(path, "rows"), 1, 8)) return {-1, -1};
      rows = r->get<int>();
    }
    if (const json* c = field(v, "cols", path, false)) {
      if (!integer(*c, join(path, "cols"), 1, 8)) return {-1, -1};
      cols = c->get<int>();
    }
    for (const char* key : {"num", "den"}) {
      const json* arr = field(v, key, path, true);
      if (!arr) continue;
      const auto apath = join(path, key);
      if (!arr->is_array() || arr->size() != static_cast<std::size_t>(rows * cols)) {
        fail(apath, "expected rows * cols = " + std::to_string(rows * cols) + " polynomials in row-major order");
        continue;
      }
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto ip = apath + "[" + std::to_string(i) + "]";
        if (std::string(key) == "den") polynomial((*arr)[i], ip);
        else complex_array((*arr)[i], ip, true);
      }
    }
    return {rows, cols};
  }

  void zen(const json& v, const std::string& path) {
    if (!object(v, path)) return;
    unknown_fields(v, path, {"measure", "signals", "symbols", "adjoint_samples"});
    if (const json* m = field(v, "measure", path, true)) measure(*m, join(path, "measure"));
    std::vector<int> dims;
    if (const json* s = field(v, "signals", path, true)) {
      const auto spath = join(path, "signals");
      if (!s->is_array() || s->empty()) fail(spath, "expected a nonempty array");
      else
        for (std::size_t i = 0; i < s->size(); ++i) dims.push_back(signal((*s)[i], spath + "[" + std::to_string(i) + "]"));
    }
    if (const json* g = field(v, "symbols", path, false)) {
      const auto gpath = join(path, "symbols");
      if (!g->is_array()) {
        fail(gpath, "expected an array");
      } else {
        for (std::size_t i = 0; i < g->size(); ++i) {
          const auto ip = gpath + "[" + std::to_string(i) + "]";
          const auto [rows, cols] = symbol((*g)[i], ip);
          if (cols < 0) continue;
          bool matched = false;
          for (int d : dims) matched = matched || d == cols;
          if (!dims.empty() && !matched) fail(ip, "no signal has dimension cols = " + std::to_string(cols));
          (void)rows;
        }
      }
    }
    if (const json* a = field(v, "adjoint_samples", path, false)) {
      integer(*a, join(path, "adjoint_samples"), 0, 100000);
    }
  }

  void demo(const json& v, const std::string& path) {
    if (!object(v, path)) return;
    unknown_fields(v, path, {"n_max"});
    if (const json* n = field(v, "n_max", path, false)) integer(*n, join(path, "n_max"), 1, 10000);
  }

 private:
  std::vector<Diagnostic>& out_;
};

double get_or(const json& obj, const char* key, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  return v.get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  return obj.is_object() && obj.contains(key) ? obj.at(key).get<int>() : fallback;
}

const json& options_of(const json& doc) {
  static const json empty = json::object();
  return doc.contains("options") ? doc.at("options") : empty;
}

json window_json(const std::vector<Window>& windows) {
  json out = json::array();
  for (const auto& w : windows) out.push_back({number(w.lo), number(w.hi)});
  return out;
}

json event_json(const CrossingEvent& e) {
  return {{"lambda", complex_json(e.lambda)},
          {"omega", number(e.omega)},
          {"h", number(e.h)},
          {"direction", e.direction},
          {"degenerate", e.degenerate}};
}

json lambda_json(const LambdaStabilityResult& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(event_json(e));
  return {{"lambda", complex_json(r.lambda)},
          {"n0", r.n0},
          {"margin", number(r.margin)},
          {"crossing_free", r.crossing_free},
          {"status", r.status == Status::Exact ? "exact" : "degenerate"},
          {"windows", window_json(r.windows)},
          {"events", events}};
}

json certificate_json(const HinfCertificate& c) {
  json out = {{"h", number(c.h)},
              {"tail_radius", number(c.tail_radius)},
              {"sup_estimate", number(c.sup_estimate)},
              {"peak_omega", number(c.peak_omega)},
              {"refined", c.refined},
              {"method", c.method == HinfCertificate::Method::SmallestSingularValue ? "smallest_singular_value"
                                                                                      : "normal_spectrum"},
              {"grid_size", c.grid.size()}};
  out["rhp_poles"] = c.rhp_poles ? json(*c.rhp_poles) : json(nullptr);
  return out;
}

RunOutput run_margin(const json& doc, const RunConfig& cfg) {
  const json& sys_doc = doc.at("system");
  const DelaySystem sys = parse_system(sys_doc);
  const json& opt = options_of(doc);
  StabilityOptions opts;
  opts.tol = cfg.tol.value_or(get_or(opt, "tol", opts.tol));
  opts.arc_samples = get_int(opt, "arc_samples", opts.arc_samples);
  opts.omega_grid = get_int(opt, "omega_grid", opts.omega_grid);
  opts.boundary_samples = get_int(opt, "boundary_samples", opts.boundary_samples);
  const double h_max = cfg.h_max.value_or(get_or(sys_doc, "h_max", 10.0));

  const StabilityReport rep = operator_margin(sys, h_max, opts);
  RunOutput out;
  json per = json::array();
  for (const auto& r : rep.per_lambda) {
    per.push_back(lambda_json(r));
    out.events.insert(out.events.end(), r.events.begin(), r.events.end());
  }
  json results = {{"margin", number(rep.margin)},
                  {"status", rep.status == Status::Exact ? "exact" : "degenerate"},
                  {"aggregate_windows", window_json(rep.aggregate_windows)},
                  {"windows_per_sample_only", rep.windows_per_sample_only},
                  {"h_max", number(h_max)},
                  {"per_lambda", per}};
  bool crossing_free = !rep.per_lambda.empty();
  for (const auto& r : rep.per_lambda) crossing_free = crossing_free && r.crossing_free;
  results["crossing_free"] = crossing_free && sys.spectrum.is_discrete();
  if (rep.bounds) results["bounds"] = {{"lower", number(rep.bounds->lower)}, {"upper", number(rep.bounds->upper)}};
  if (rep.minimizer) {
    results["minimizer"] = {{"lambda", complex_json(rep.minimizer->lambda)},
                            {"omega", number(rep.minimizer->omega)},
                            {"h", number(rep.minimizer->h)}};
  }
  json warnings = json::array();
  for (const auto& n : rep.notes) warnings.push_back(n);
  if (rep.status == Status::Degenerate) {
    warnings.push_back("degenerate crossing: windows are reported only up to the first degenerate event");
    out.exit_code = 2;
  }
  out.report = {{"results", results}, {"warnings", warnings}};
  return out;
}

RunOutput run_hinf(const json& doc, const RunConfig& cfg) {
  const json& sys_doc = doc.at("system");
  const DelaySystem sys = parse_system(sys_doc);
  const json& opt = options_of(doc);
  GridConfig grid;
  grid.points = get_int(opt, "grid_points", grid.points);
  grid.tol = cfg.tol.value_or(get_or(opt, "tol", grid.tol));
  grid.max_refine_iterations = get_int(opt, "max_refine_iterations", grid.max_refine_iterations);

  RunOutput out;
  json results;
  json warnings = json::array();
  try {
    const HinfCertificate cert = hinf_boundary_norm(sys, sys.h, grid);
    results = certificate_json(cert);
    const bool stable = std::isfinite(cert.sup_estimate);
    results["verdict"] = stable ? "stable" : "unstable";
    if (!cert.rhp_poles) warnings.push_back("continuum spectrum: boundary sup only, no pole count");
    if (!cert.refined) warnings.push_back("peak refinement hit the iteration cap");
    out.norm_grid = cert.grid;
  } catch (const SingularOnGrid& e) {
    results = {{"h", number(sys.h)},
               {"verdict", "unstable"},
               {"crossing_detected", {{"omega", number(e.omega())}, {"norm_estimate", number(e.norm_estimate())}}}};
    warnings.push_back("boundary operator numerically singular: crossing detected at this delay");
  }
  out.report = {{"results", results}, {"warnings", warnings}};
  return out;
}

RunOutput run_zen(const json& doc, const RunConfig& cfg) {
  const json& z = doc.at("zen");
  const MeasureDescriptor nu = parse_measure(z.at("measure"));
  const json& opt = options_of(doc);
  ZenQuadConfig quad;
  if (opt.contains("quad_tol")) {
    quad.outer.tol = opt.at("quad_tol").get<double>();
    quad.inner.tol = 0.1 * quad.outer.tol;
  }
  const double pass_tol = cfg.tol.value_or(get_or(opt, "tol", 1e-6));
  const int n_adjoint = z.value("adjoint_samples", 8);

  std::vector<TestSignal> signals;
  for (const auto& s : z.at("signals")) signals.push_back(parse_signal(s));

  json warnings = json::array();
  json results;
  try {
    results["doubling_constant"] = number(doubling_constant(nu, doubling_grid()));
  } catch (const NotDoubling& e) {
    warnings.push_back(e.what());
  }

  bool all_pass = true;
  json iso = json::array();
  for (std::size_t i = 0; i < signals.size(); ++i) {
    try {
      const auto r = verify_isometry(signals[i], nu, quad);
      const bool pass = r.rel_err <= pass_tol;
      all_pass = all_pass && pass;
      iso.push_back({{"signal", i}, {"time", number(r.lhs)}, {"frequency", number(r.rhs)},
                     {"rel_err", number(r.rel_err)}, {"pass", pass}});
    } catch (const Divergent& e) {
      iso.push_back({{"signal", i}, {"divergent", e.what()}});
    }
  }
  results["isometry"] = iso;

  // Adjoint samples come from a seeded generator so reports are reproducible.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> re(0.2, 3.0), im(-5.0, 5.0), unit(-1.0, 1.0);
  json mult = json::array();
  // Without a closed-form kernel each kernel value is itself a quadrature, and
  // the adjoint check nests it inside the double frequency integral.
  const bool closed_kernel = weight_from_measure(nu).closed_form() != Weight::ClosedForm::General;
  if (!closed_kernel && z.contains("symbols") && n_adjoint > 0) {
    warnings.push_back("adjoint check skipped: the kernel of this measure has no closed form");
  }
  if (z.contains("symbols")) {
    for (std::size_t g = 0; g < z.at("symbols").size(); ++g) {
      const RationalMatrix G = parse_symbol(z.at("symbols")[g]);
      for (std::size_t i = 0; i < signals.size(); ++i) {
        if (signals[i].dim != G.cols) continue;
        std::vector<AdjointSample> samples;
        for (int k = 0; closed_kernel && k < n_adjoint; ++k) {
          CVector x(G.rows);
          for (int j = 0; j < G.rows; ++j) x(j) = cplx{unit(rng), unit(rng)};
          if (x.norm() == 0.0) x(0) = 1.0;
          samples.push_back({cplx{re(rng), im(rng)}, x / x.norm()});
        }
        try {
          const auto r = verify_multiplier(G, laplace(signals[i]), nu, samples, quad);
          const bool contractive = r.ratio <= r.sup_G + pass_tol;
          const bool adjoint = r.adjoint_residual <= pass_tol;
          all_pass = all_pass && contractive && adjoint;
          json row = {{"symbol", g}, {"signal", i}, {"ratio", number(r.ratio)}, {"sup_G", number(r.sup_G)},
                      {"adjoint_samples", samples.size()}, {"contractive", contractive}};
          row["adjoint_residual"] = samples.empty() ? json(nullptr) : number(r.adjoint_residual);
          row["adjoint_pass"] = samples.empty() ? json(nullptr) : json(adjoint);
          mult.push_back(row);
        } catch (const Divergent& e) {
          mult.push_back({{"symbol", g}, {"signal", i}, {"divergent", e.what()}});
        }
      }
    }
  }
  results["multiplier"] = mult;
  results["pass"] = all_pass;
  results["pass_tol"] = number(pass_tol);

  RunOutput out;
  out.report = {{"results", results}, {"warnings", warnings}};
  return out;
}

RunOutput run_neutral(const json& doc) {
  const int n_max = doc.contains("demo") ? get_int(doc.at("demo"), "n_max", 20) : 20;
  json samples = json::array();
  bool increasing = true;
  double prev = 0.0;
  for (const auto& s : neutral_demo(n_max)) {
    increasing = increasing && s.gain > prev;
    prev = s.gain;
    samples.push_back({{"n", s.n}, {"s", complex_json(s.s)}, {"gain", number(s.gain)}});
  }
  RunOutput out;
  out.report = {{"results", {{"samples", samples}, {"strictly_increasing", increasing}}},
                {"warnings", json::array()}};
  return out;
}

RunOutput run_unbounded(const json& doc, const RunConfig& cfg) {
  const int n_max = doc.contains("demo") ? get_int(doc.at("demo"), "n_max", 10) : 10;
  GridConfig grid;
  grid.points = get_int(options_of(doc), "grid_points", grid.points);
  grid.tol = cfg.tol.value_or(get_or(options_of(doc), "tol", grid.tol));
  json samples = json::array();
  for (const auto& s : unbounded_A_demo(n_max, grid)) {
    samples.push_back({{"n", s.n}, {"sup", number(s.sup)}, {"peak_omega", number(s.peak_omega)}});
  }
  RunOutput out;
  out.report = {{"results", {{"samples", samples}}}, {"warnings", json::array()}};
  return out;
}

}  // namespace

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json complex_json(cplx z) { return json::array({number(z.real()), number(z.imag())}); }

std::optional<json> load_problem(const std::filesystem::path& file, std::vector<Diagnostic>& diags) {
  std::ifstream in(file);
  if (!in) {
    diags.push_back({file.string(), "cannot open file"});
    return std::nullopt;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    diags.push_back({"line " + std::to_string(line) + ", column " + std::to_string(col), e.what()});
    return std::nullopt;
  }
}

std::vector<Diagnostic> validate_problem(const json& doc, const std::string& kind) {
  std::vector<Diagnostic> diags;
  Checker c(diags);
  if (!c.object(doc, "$")) return diags;
  c.unknown_fields(doc, "", {"kind", "system", "zen", "demo", "options", "description"});
  std::string k = kind;
  if (const json* field = c.field(doc, "kind", "", kind.empty())) {
    if (!field->is_string() || !kKinds.count(field->get<std::string>())) {
      c.fail("kind", "expected one of margin, hinf, zen-verify, neutral-demo, unbounded-demo");
      return diags;
    }
    if (!kind.empty() && field->get<std::string>() != kind) {
      c.fail("kind", "file is a '" + field->get<std::string>() + "' problem, not '" + kind + "'");
    }
    if (k.empty()) k = field->get<std::string>();
  }
  if (k.empty()) return diags;
  if (k == "margin" || k == "hinf") {
    if (const json* s = c.field(doc, "system", "", true)) c.system(*s, "system", k);
  } else if (k == "zen-verify") {
    if (const json* z = c.field(doc, "zen", "", true)) c.zen(*z, "zen");
  } else {
    if (const json* d = c.field(doc, "demo", "", false)) c.demo(*d, "demo");
  }
  if (const json* o = c.field(doc, "options", "", false)) c.options(*o, "options");
  return diags;
}

cplx parse_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw Error("expected a complex number");
}

Polynomial parse_polynomial(const json& v) {
  std::vector<cplx> c;
  for (const auto& x : v) c.push_back(parse_complex(x));
  return Polynomial(std::move(c));
}

SpectrumDescriptor parse_spectrum(const json& v) {
  const auto type = v.at("type").get<std::string>();
  if (type == "points") {
    std::vector<cplx> pts;
    for (const auto& x : v.at("values")) pts.push_back(parse_complex(x));
    return shape::Points{pts};
  }
  if (type == "matrix") {
    const auto& rows = v.at("entries");
    const auto n = static_cast<Eigen::Index>(rows.size());
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        m(i, j) = parse_complex(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    return shape::Matrix{m};
  }
  if (type == "disk") return shape::Disk{parse_complex(v.at("center")), v.at("radius").get<double>()};
  if (type == "circle") return shape::Circle{parse_complex(v.at("center")), v.at("radius").get<double>()};
  if (type == "annulus") {
    return shape::Annulus{parse_complex(v.at("center")), v.at("r_inner").get<double>(), v.at("r_outer").get<double>()};
  }
  if (type == "union") {
    std::vector<SpectrumDescriptor> members;
    for (const auto& m : v.at("members")) members.push_back(parse_spectrum(m));
    return SpectrumDescriptor::make_union(std::move(members));
  }
  throw UnsupportedDescriptor("unknown spectrum type '" + type + "'");
}

DelaySystem parse_system(const json& v) {
  DelaySystem sys{parse_polynomial(v.at("P")), parse_polynomial(v.at("Q")), parse_spectrum(v.at("spectrum")),
                  std::nullopt, 0.0, false};
  if (v.contains("norm_A")) sys.norm_A = v.at("norm_A").get<double>();
  if (v.contains("h")) sys.h = v.at("h").get<double>();
  if (v.contains("subnormal")) sys.subnormal = v.at("subnormal").get<bool>();
  return sys;
}

MeasureDescriptor parse_measure(const json& v) {
  MeasureDescriptor nu;
  if (v.contains("atoms"))
    for (const auto& a : v.at("atoms")) nu.atoms.push_back({a.at("location").get<double>(), a.at("mass").get<double>()});
  std::sort(nu.atoms.begin(), nu.atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  if (v.contains("density"))
    for (const auto& d : v.at("density"))
      nu.density.push_back({d.at("from").get<double>(), d.at("to").get<double>(),
                            d.at("poly").get<std::vector<double>>()});
  if (v.contains("tail")) nu.tail = LebesgueTail{get_or(v.at("tail"), "from", 0.0), get_or(v.at("tail"), "value", 1.0)};
  return nu;
}

TestSignal parse_signal(const json& v) {
  TestSignal f;
  f.dim = v.value("dim", 1);
  for (const auto& t : v.at("terms")) {
    f.terms.push_back({parse_complex(t.at("coeff")), t.value("power", 0), parse_complex(t.at("rate")),
                       t.value("component", 0)});
  }
  return f;
}

RationalMatrix parse_symbol(const json& v) {
  RationalMatrix g;
  g.rows = v.value("rows", 1);
  g.cols = v.value("cols", 1);
  for (const auto& p : v.at("num")) g.num.push_back(parse_polynomial(p));
  for (const auto& p : v.at("den")) g.den.push_back(parse_polynomial(p));
  return g;
}

RunOutput run_problem(const std::string& kind, const json& doc, const RunConfig& cfg) {
  RunOutput out;
  if (kind == "margin") out = run_margin(doc, cfg);
  else if (kind == "hinf") out = run_hinf(doc, cfg);
  else if (kind == "zen-verify") out = run_zen(doc, cfg);
  else if (kind == "neutral-demo") out = run_neutral(doc);
  else if (kind == "unbounded-demo") out = run_unbounded(doc, cfg);
  else throw Error("unknown problem kind '" + kind + "'");

  json config = {{"seed", cfg.seed}};
  config["tol"] = cfg.tol ? number(*cfg.tol) : json(nullptr);
  config["h_max"] = cfg.h_max ? number(*cfg.h_max) : json(nullptr);
  const json input = doc;
  json report = {{"version", kVersion},
                 {"kind", kind},
                 {"fingerprint", fingerprint({{"input", input}, {"config", config}, {"version", kVersion}})},
                 {"config", config},
                 {"input", input},
                 {"results", out.report.at("results")},
                 {"warnings", out.report.at("warnings")}};
  out.report = std::move(report);
  return out;
}

std::string fingerprint(const json& value) {
  const std::string text = value.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_csv(const std::filesystem::path& dir, const RunOutput& out) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    f.precision(17);
    return f;
  };
  {
    auto f = open("events.csv");
    f << "lambda_re,lambda_im,omega,h,direction,degenerate\n";
    for (const auto& e : out.events) {
      f << e.lambda.real() << ',' << e.lambda.imag() << ',' << e.omega << ',' << e.h << ',' << e.direction << ','
        << (e.degenerate ? 1 : 0) << '\n';
    }
  }
  if (!out.norm_grid.empty()) {
    auto f = open("norm_grid.csv");
    f << "omega,norm\n";
    for (const auto& [w, v] : out.norm_grid) f << w << ',' << v << '\n';
  }
}

}  // namespace delaymargin::cli
