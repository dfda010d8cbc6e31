#include "conjscope/catalog.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <span>

#include "conjscope/errors.hpp"
#include "conjscope/jacobi.hpp"

namespace conjscope {

namespace {

using std::numbers::pi;

double number(const ParamValues& p, const std::string& entry, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end() || it->second.empty()) throw MissingParam(entry, key);
  const std::string& s = it->second;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("parameter '" + key + "' of '" + entry + "' is not a number: " + s);
  }
  return v;
}

ParamValues with_defaults(const CatalogEntry& e, const ParamValues& given) {
  ParamValues out;
  for (const auto& p : e.params) out[p.name] = p.default_value;
  for (const auto& [k, v] : given) {
    const std::string key = canonical_param_name(k);
    if (out.find(key) == out.end()) {
      throw ConfigError("entry '" + e.name + "' has no parameter '" + key + "'");
    }
    out[key] = v;
  }
  return out;
}

ParamMap numeric(const ParamValues& p, const std::string& entry, std::initializer_list<const char*> keys) {
  ParamMap out;
  for (const char* k : keys) out[k] = number(p, entry, k);
  return out;
}

SigmaExprs zero_sigma(std::size_t n) { return SigmaExprs(n, std::vector<Expr>(n, Expr::constant(0.0))); }

void set_pair(SigmaExprs& s, std::size_t i, std::size_t j, const std::string& text) {
  s[i][j] = Expr::parse(text);
  s[j][i] = Expr::parse("-(" + text + ")");
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> kpi_times(double period, double T) {
  std::vector<double> t;
  for (int k = 1; k * period <= T; ++k) t.push_back(k * period);
  return t;
}

BuiltSystem base(const CatalogEntry& e, const ParamValues& p) {
  BuiltSystem b;
  b.name = e.name;
  b.params = p;
  b.default_x0 = to_vec(e.default_x0);
  b.default_T = e.default_T;
  b.check_initial = [](const Vec&) {};
  return b;
}

std::vector<CatalogEntry> make_catalog();

}  // namespace

std::string canonical_param_name(std::string_view name) {
  if (name == "ω" || name == "Ω") return "omega";
  if (name == "ε") return "eps";
  if (name == "epsilon") return "eps";
  if (name == "γ") return "gamma";
  return std::string(name);
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = make_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  throw UnknownEntry(std::string(name));
}

BuiltSystem build(std::string_view name, const ParamValues& params) {
  const CatalogEntry& e = catalog_entry(name);
  return e.factory(with_defaults(e, params));
}

// Closed forms -----------------------------------------------------------

std::complex<double> PerturbedPairOracle::z(double t) const {
  if (t == 0.0) return 0.0;
  return std::sin(omega * t) / omega;
}

Vec PerturbedPairOracle::state(const Vec& x0, double t) const {
  const std::complex<double> z0(x0[0], x0[1]);
  const std::complex<double> w0(x0[2], x0[3]);
  const std::complex<double> s = std::sin(omega * t);
  const std::complex<double> c = std::cos(omega * t);
  const std::complex<double> zt = z0 * c + w0 * s / omega;
  const std::complex<double> wt = -z0 * omega * s + w0 * c;
  Vec out(4);
  out << zt.real(), zt.imag(), wt.real(), wt.imag();
  return out;
}

PerturbedPairOracle perturbed_pair_oracle(double eps, double T) {
  PerturbedPairOracle o;
  o.eps = eps;
  o.T = T;
  o.omega = std::sqrt(std::complex<double>(1.0, -eps));
  // sin(ωt) = 0 needs ωt ∈ πZ, impossible for t > 0 once ω is not real.
  if (eps == 0.0) o.conjugate_times = kpi_times(pi, T);
  constexpr int samples = 20000;
  std::vector<double> grid(samples + 1);
  for (int i = 0; i <= samples; ++i) grid[static_cast<std::size_t>(i)] = T * i / samples;
  o.min_sigma = windowed_minimum([&o](double t) { return o.sigma(t); }, grid);
  return o;
}

double f0(double t) { return std::sin(t); }

double f1(double t) { return 0.5 * (t * std::cos(t) - std::sin(t)); }

double f1_series(double t, int terms) {
  // Σ_{n≥1} (-1)^n n t^(2n+1) / (2n+1)!
  double term = t;  // t^(2n+1)/(2n+1)! at n = 0
  double sum = 0.0;
  for (int n = 1; n <= terms; ++n) {
    term *= t * t / ((2.0 * n) * (2.0 * n + 1.0));
    sum += (n % 2 == 0 ? 1.0 : -1.0) * n * term;
  }
  return sum;
}

DancingCurvature dancing_curvature(const std::string& F, double t, const Vec& x, const Vec& y) {
  const ExprProgram prog(Expr::parse(F), {"t", "x1", "y1"});
  const double Fv = prog.eval(std::vector<double>{t, x[0], y[0]});
  // Total derivative direction restricted to (t, x1, y1).
  const std::vector<HyperDual> s_xy{HyperDual(t, 1.0, 0.0, 0.0), HyperDual(x[0], y[0], 0.0, 0.0),
                                    HyperDual(y[0], Fv, 1.0, 0.0)};
  const HyperDual r = prog.eval(std::span<const HyperDual>(s_xy));
  const double XF = r.e1;
  const double Fy = r.e2;
  const double XFy = r.e12;
  const std::vector<HyperDual> s_x{HyperDual(t), HyperDual(x[0], 1.0, 0.0, 0.0), HyperDual(y[0])};
  const double Fx = prog.eval(std::span<const HyperDual>(s_x)).e1;

  DancingCurvature c;
  const double d = y[0] - x[1];
  c.chi1 = -Fx + 0.5 * XFy - 0.25 * Fy * Fy;
  c.chi2 = 0.5 * XF / d + 0.75 * Fv * (2.0 * y[1] - Fv) / (d * d);
  c.k21_printed = -y[1] * (c.chi1 + c.chi2) / d;
  c.k21 = y[1] * (c.chi1 - c.chi2) / d;
  return c;
}

MechanicalCurvature mechanical_curvature(const ParamValues& params, const Vec& q) {
  const std::string e = "mechanical";
  const double a1 = number(params, e, "a1");
  const double a2 = number(params, e, "a2");
  const double b = number(params, e, "b");
  const double s = number(params, e, "s");
  const double scale = number(params, e, "scale");
  Mat g(2, 2);
  g << number(params, e, "g11"), number(params, e, "g12"), number(params, e, "g12"), number(params, e, "g22");
  Mat hess(2, 2);
  hess << a1 + 2.0 * b * q[1], 2.0 * b * q[0], 2.0 * b * q[0], a2;
  hess *= scale;
  Mat J(2, 2);  // J(s, j) = ∂F0_s/∂q_j for F0 = s·(q2, -q1)
  J << 0.0, s, -s, 0.0;
  const Mat ginv = g.inverse();
  MechanicalCurvature out;
  out.published = ginv * (-hess + J.transpose());
  out.derived = ginv * (hess - J);
  return out;
}

// Entries ----------------------------------------------------------------

namespace {

CatalogEntry harmonic() {
  CatalogEntry e;
  e.name = "harmonic";
  e.description = "x'' = -omega^2 x";
  e.params = {{"omega", "1", "angular frequency", false}};
  e.default_x0 = {0.3, 0.7};
  e.default_T = 7.0;
  KnownFact times;
  times.id = "conjugate-times";
  times.description = "conjugate times k*pi/omega";
  times.source = "closed-form";
  times.tolerance = 1e-6;
  times.conjugate_times = kpi_times(pi, 7.0);
  times.multiplicities = {1, 1};
  KnownFact times3 = times;
  times3.id = "conjugate-times-omega3";
  times3.params = {{"omega", "3"}};
  times3.conjugate_times = kpi_times(pi / 3.0, 7.0);
  times3.multiplicities.assign(times3.conjugate_times.size(), 1);
  KnownFact k;
  k.id = "curvature";
  k.description = "K = omega^2";
  k.source = "closed-form";
  k.tolerance = 1e-12;
  k.params = {{"omega", "2"}};
  k.curvature = std::vector<double>{4.0};
  e.facts = {times, times3, k};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("harmonic"), p);
    b.model = make_sode({"-omega^2*x1"}, numeric(p, "harmonic", {"omega"}));
    SigmaExprs s = zero_sigma(2);
    set_pair(s, 0, 1, "1");
    b.sigma = s;
    return b;
  };
  return e;
}

CatalogEntry damped() {
  CatalogEntry e;
  e.name = "damped_oscillator";
  e.description = "x'' = -x - 2 gamma x'";
  e.params = {{"gamma", "0.25", "damping rate", false}};
  e.default_x0 = {0.3, 0.7};
  e.default_T = 7.0;
  const double g = 0.25;
  const double w = std::sqrt(1.0 - g * g);
  KnownFact times;
  times.id = "conjugate-times";
  times.description = "conjugate times k*pi/sqrt(1 - gamma^2)";
  times.source = "closed-form";
  times.tolerance = 1e-6;
  times.conjugate_times = kpi_times(pi / w, 7.0);
  times.multiplicities.assign(times.conjugate_times.size(), 1);
  KnownFact k;
  k.id = "curvature";
  k.description = "K = 1 - gamma^2";
  k.source = "closed-form";
  k.tolerance = 1e-12;
  k.curvature = std::vector<double>{1.0 - g * g};
  e.facts = {times, k};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("damped_oscillator"), p);
    b.model = make_sode({"-x1 - 2*gamma*y1"}, numeric(p, "damped_oscillator", {"gamma"}));
    return b;
  };
  return e;
}

CatalogEntry perturbed() {
  CatalogEntry e;
  e.name = "perturbed_pair";
  e.description = "x'' = -x - eps y, y'' = -y + eps x";
  e.params = {{"eps", "0", "non-symmetric coupling", false}};
  e.default_x0 = {0.3, -0.2, 0.5, 0.4};
  e.default_T = 7.0;
  KnownFact dbl;
  dbl.id = "double-conjugate-times";
  dbl.description = "eps = 0: double conjugate times k*pi";
  dbl.source = "published-example";
  dbl.tolerance = 1e-6;
  dbl.conjugate_times = kpi_times(pi, 7.0);
  dbl.multiplicities = {2, 2};
  KnownFact none;
  none.id = "no-conjugate-times";
  none.description = "eps = 0.05: no conjugate times in (0, 3*pi]";
  none.source = "published-example";
  none.tolerance = 1e-6;
  none.params = {{"eps", "0.05"}};
  none.T = 3.0 * pi;
  KnownFact k;
  k.id = "curvature";
  k.description = "K = [[1, eps], [-eps, 1]]";
  k.source = "closed-form";
  k.tolerance = 1e-12;
  k.params = {{"eps", "0.3"}};
  k.curvature = std::vector<double>{1.0, 0.3, -0.3, 1.0};
  e.facts = {dbl, none, k};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("perturbed_pair"), p);
    b.model = make_sode(std::vector<std::string>{"-x1 - eps*x2", "-x2 + eps*x1"}, numeric(p, "perturbed_pair", {"eps"}));
    SigmaExprs s = zero_sigma(4);
    set_pair(s, 0, 2, "1");
    set_pair(s, 1, 3, "1");
    b.sigma = s;
    return b;
  };
  return e;
}

CatalogEntry dancing() {
  CatalogEntry e;
  e.name = "dancing";
  e.description = "x1'' = F(t, x1, x1'), x2'' = x2'/(x1' - x2) (F - 2 x2')";
  e.params = {{"F", "sin(x1)", "expression in t, x1, y1", true}};
  e.default_x0 = {3.0, -1.0, 0.0, 0.2};
  e.default_T = 5.0;
  KnownFact flat;
  flat.id = "flat";
  flat.description = "F = 0: K = 0";
  flat.source = "published-example";
  flat.tolerance = 1e-8;
  flat.params = {{"F", "0"}};
  flat.curvature = std::vector<double>{0.0, 0.0, 0.0, 0.0};
  KnownFact k;
  k.id = "curvature";
  k.description = "K = [[chi1, 0], [y2 (chi1 - chi2)/(y1 - x2), chi2]] at x0";
  k.source = "closed-form";
  k.tolerance = 1e-6;
  {
    Vec x(2), y(2);
    x << e.default_x0[0], e.default_x0[1];
    y << e.default_x0[2], e.default_x0[3];
    const DancingCurvature c = dancing_curvature("sin(x1)", 0.0, x, y);
    k.curvature = std::vector<double>{c.chi1, 0.0, c.k21, c.chi2};
  }
  e.facts = {flat, k};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("dancing"), p);
    const std::string F = p.at("F");
    if (F.empty()) throw MissingParam("dancing", "F");
    const Expr f = Expr::parse(F);
    for (const auto& v : f.variables()) {
      if (v != "t" && v != "x1" && v != "y1") {
        throw ConfigError("dancing F may only use t, x1 and y1, found '" + v + "'");
      }
    }
    b.model = make_sode(std::vector<std::string>{"(" + F + ")", "y2/(y1 - x2)*((" + F + ") - 2*y2)"});
    const bool autonomous = std::get<SodeModel>(b.model).autonomous;
    b.check_initial = [autonomous](const Vec& x0) {
      const int o = autonomous ? 0 : 1;
      if (std::abs(x0[o + 2] - x0[o + 1]) < 0.05) {
        throw PreconditionViolation("dancing system needs |y1 - x2| >= 0.05 at the start");
      }
    };
    return b;
  };
  return e;
}

CatalogEntry mechanical() {
  CatalogEntry e;
  e.name = "mechanical";
  e.description =
      "q'' = g^-1 (-grad P + F0), P = scale (a1 q1^2/2 + a2 q2^2/2 + b q1^2 q2), F0 = s (q2, -q1)";
  e.params = {{"a1", "1", "potential stiffness along q1", false},
              {"a2", "2", "potential stiffness along q2", false},
              {"b", "0.1", "cubic coupling", false},
              {"s", "0.3", "circulatory force strength", false},
              {"scale", "1", "overall potential scale", false},
              {"g11", "2", "kinetic metric", false},
              {"g12", "0.5", "kinetic metric", false},
              {"g22", "1", "kinetic metric", false}};
  e.default_x0 = {0.2, -0.1, 0.3, 0.1};
  e.default_T = 6.0;
  KnownFact k;
  k.id = "curvature";
  k.description = "K = g^-1 (Hess P - dF0) at x0";
  k.source = "closed-form";
  k.tolerance = 1e-10;
  {
    const ParamValues defaults{{"a1", "1"}, {"a2", "2"}, {"b", "0.1"}, {"s", "0.3"},
                               {"scale", "1"}, {"g11", "2"}, {"g12", "0.5"}, {"g22", "1"}};
    Vec q(2);
    q << e.default_x0[0], e.default_x0[1];
    const Mat K = mechanical_curvature(defaults, q).derived;
    k.curvature = std::vector<double>{K(0, 0), K(0, 1), K(1, 0), K(1, 1)};
  }
  e.facts = {k};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("mechanical"), p);
    const ParamMap nums =
        numeric(p, "mechanical", {"a1", "a2", "b", "s", "scale", "g11", "g12", "g22"});
    const double det = nums.at("g11") * nums.at("g22") - nums.at("g12") * nums.at("g12");
    if (!(nums.at("g11") > 0.0 && det > 0.0)) {
      throw ConfigError("mechanical kinetic metric must be positive definite");
    }
    const std::string R1 = "(-(scale*(a1*x1 + 2*b*x1*x2)) + s*x2)";
    const std::string R2 = "(-(scale*(a2*x2 + b*x1^2)) - s*x1)";
    const std::string D = "(g11*g22 - g12^2)";
    b.model = make_sode(std::vector<std::string>{"(g22*" + R1 + " - g12*" + R2 + ")/" + D,
                         "(-g12*" + R1 + " + g11*" + R2 + ")/" + D},
                        nums);
    SigmaExprs s = zero_sigma(4);
    set_pair(s, 0, 2, "g11");
    set_pair(s, 0, 3, "g12");
    set_pair(s, 1, 2, "g12");
    set_pair(s, 1, 3, "g22");
    b.sigma = s;
    return b;
  };
  return e;
}

CatalogEntry sphere() {
  CatalogEntry e;
  e.name = "sphere_spray";
  e.description = "geodesic spray of the unit sphere in (polar, azimuth) coordinates";
  e.params = {};
  e.default_x0 = {pi / 2.0, 0.0, std::sin(0.8), std::cos(0.8)};
  e.default_T = 4.0;
  KnownFact times;
  times.id = "first-conjugate-time";
  times.description = "unit-speed geodesics: first conjugate time pi";
  times.source = "closed-form";
  times.tolerance = 1e-5;
  times.conjugate_times = {pi};
  times.multiplicities = {1};
  e.facts = {times};
  e.factory = [](const ParamValues& p) {
    BuiltSystem b = base(catalog_entry("sphere_spray"), p);
    b.model = make_sode(std::vector<std::string>{"sin(x1)*cos(x1)*y2^2", "-2*cos(x1)/sin(x1)*y1*y2"});
    SigmaExprs s = zero_sigma(4);
    set_pair(s, 0, 2, "1");
    set_pair(s, 1, 3, "sin(x1)^2");
    set_pair(s, 1, 0, "2*sin(x1)*cos(x1)*y2");
    b.sigma = s;
    b.check_initial = [](const Vec& x0) {
      if (x0[0] < 0.2 || x0[0] > pi - 0.2) {
        throw PreconditionViolation("polar angle must stay in [0.2, pi - 0.2]");
      }
    };
    return b;
  };
  return e;
}

std::vector<CatalogEntry> make_catalog() {
  return {harmonic(), damped(), perturbed(), dancing(), mechanical(), sphere()};
}

}  // namespace

}  // namespace conjscope
