#include "conjscope/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "conjscope/errors.hpp"
#include "json.hpp"

namespace conjscope {

using nlohmann::json;

namespace {

json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double get_num(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("expected a number, found '" + s + "'");
  }
  return j.get<double>();
}

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> get_nums(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(get_num(x));
  return v;
}

json matrix(const Matrix& M) {
  json a = json::array();
  for (const auto& row : M) a.push_back(nums(row));
  return a;
}

Matrix get_matrix(const json& j) {
  Matrix M;
  for (const auto& row : j) M.push_back(get_nums(row));
  return M;
}

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> get_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return get_num(j);
}

json conj(const std::vector<ConjugateRecord>& v) {
  json a = json::array();
  for (const auto& c : v) {
    a.push_back({{"t", num(c.t)}, {"multiplicity", c.multiplicity}, {"mode", c.mode}, {"kernel", matrix(c.kernel)}});
  }
  return a;
}

std::vector<ConjugateRecord> get_conj(const json& j) {
  std::vector<ConjugateRecord> v;
  for (const auto& c : j) {
    ConjugateRecord r;
    r.t = get_num(c.at("t"));
    r.multiplicity = c.at("multiplicity").get<int>();
    r.mode = c.at("mode").get<std::string>();
    r.kernel = get_matrix(c.at("kernel"));
    v.push_back(std::move(r));
  }
  return v;
}

json bounds(const BoundsRecord& b) {
  json tracks = json::array();
  for (const auto& t : b.tracks) {
    tracks.push_back({{"direction", nums(t.direction)},
                      {"kappa", num(t.kappa)},
                      {"lambda_max", num(t.lambda_max)},
                      {"predicted", opt(t.predicted)},
                      {"sturm_zeros", nums(t.sturm_zeros)}});
  }
  return {{"metric", b.metric},
          {"lambda_max", num(b.lambda_max)},
          {"trK_min", num(b.trK_min)},
          {"symmetry_residual", num(b.symmetry_residual)},
          {"thm1_safe_interval", {0.0, num(b.t_c)}},
          {"thm2_upper", opt(b.T_star)},
          {"thm2_reason", b.thm2_reason},
          {"thm3_tracks", tracks},
          {"verdicts", {{"thm1", b.thm1}, {"thm2", b.thm2}, {"thm3", b.thm3}}},
          {"notes", b.notes}};
}

BoundsRecord get_bounds(const json& j) {
  BoundsRecord b;
  b.metric = j.at("metric").get<std::string>();
  b.lambda_max = get_num(j.at("lambda_max"));
  b.trK_min = get_num(j.at("trK_min"));
  b.symmetry_residual = get_num(j.at("symmetry_residual"));
  b.t_c = get_num(j.at("thm1_safe_interval").at(1));
  b.T_star = get_opt(j.at("thm2_upper"));
  b.thm2_reason = j.at("thm2_reason").get<std::string>();
  for (const auto& t : j.at("thm3_tracks")) {
    TrackRecord r;
    r.direction = get_nums(t.at("direction"));
    r.kappa = get_num(t.at("kappa"));
    r.lambda_max = get_num(t.at("lambda_max"));
    r.predicted = get_opt(t.at("predicted"));
    r.sturm_zeros = get_nums(t.at("sturm_zeros"));
    b.tracks.push_back(std::move(r));
  }
  const auto& v = j.at("verdicts");
  b.thm1 = v.at("thm1").get<std::string>();
  b.thm2 = v.at("thm2").get<std::string>();
  b.thm3 = v.at("thm3").get<std::string>();
  b.notes = j.at("notes").get<std::vector<std::string>>();
  return b;
}

}  // namespace

bool AnalysisReport::any_violated() const {
  const auto bad = [](const BoundsRecord& b) {
    return b.thm1 == "violated" || b.thm2 == "violated" || b.thm3 == "violated";
  };
  return bad(bounds) || (sigma_bounds && bad(*sigma_bounds));
}

std::string to_json_string(const AnalysisReport& r, int indent) {
  json j;
  j["system"] = {{"name", r.system}, {"params", r.params}, {"m", r.m}, {"n", r.n}};
  const auto& tr = r.trajectory;
  j["trajectory"] = {{"x0", nums(tr.x0)},
                     {"T", num(tr.T)},
                     {"rel_tol", num(tr.rel_tol)},
                     {"abs_tol", num(tr.abs_tol)},
                     {"rank_tol", num(tr.rank_tol)},
                     {"accepted_steps", tr.accepted_steps},
                     {"rejected_steps", tr.rejected_steps},
                     {"rhs_evals", tr.rhs_evals}};
  const auto& rg = r.regularity;
  j["regularity"] = {{"ok", rg.ok},
                     {"R1", rg.r1},
                     {"R2", rg.r2},
                     {"I", rg.invariance},
                     {"invariant_mod_X_only", rg.invariant_mod_X_only},
                     {"points", rg.points},
                     {"max_cond_D", num(rg.max_cond_D)},
                     {"max_residual", num(rg.max_residual)},
                     {"min_field_norm", num(rg.min_field_norm)},
                     {"failure", rg.failure}};
  j["conjugate_times"] = conj(r.conjugate_times);
  j["oracle_times"] = r.oracle_times ? conj(*r.oracle_times) : json(nullptr);
  j["min_sigma_min"] = opt(r.min_sigma);
  j["bounds"] = bounds(r.bounds);
  j["sigma_bounds"] = r.sigma_bounds ? bounds(*r.sigma_bounds) : json(nullptr);
  if (r.hamiltonian) {
    const auto& h = *r.hamiltonian;
    j["hamiltonian"] = {{"lagrangian_residual", num(h.lagrangian_residual)},
                        {"semi_invariance_residual", num(h.semi_invariance_residual)},
                        {"metric", matrix(h.metric)},
                        {"metric_flipped", h.metric_flipped},
                        {"metric_definite", h.metric_definite},
                        {"metric_symmetry", num(h.metric_symmetry)},
                        {"selfadjoint_residual", num(h.selfadjoint_residual)},
                        {"horizontal_lagrangian", num(h.horizontal_lagrangian)},
                        {"metric_drift", num(h.metric_drift)}};
  } else {
    j["hamiltonian"] = nullptr;
  }
  j["warnings"] = r.warnings;
  const auto& c = r.curves;
  j["curves"] = {{"t", nums(c.t)},
                 {"sigma_min_P", nums(c.sigma_min)},
                 {"k_eig_re", matrix(c.eig_re)},
                 {"k_eig_im", matrix(c.eig_im)},
                 {"tr_K", nums(c.trK)},
                 {"det_G", nums(c.detG)}};
  return j.dump(indent) + "\n";
}

AnalysisReport parse_report(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  AnalysisReport r;
  try {
    const auto& s = j.at("system");
    r.system = s.at("name").get<std::string>();
    r.params = s.at("params").get<std::map<std::string, std::string>>();
    r.m = s.at("m").get<int>();
    r.n = s.at("n").get<int>();
    const auto& tr = j.at("trajectory");
    r.trajectory.x0 = get_nums(tr.at("x0"));
    r.trajectory.T = get_num(tr.at("T"));
    r.trajectory.rel_tol = get_num(tr.at("rel_tol"));
    r.trajectory.abs_tol = get_num(tr.at("abs_tol"));
    r.trajectory.rank_tol = get_num(tr.at("rank_tol"));
    r.trajectory.accepted_steps = tr.at("accepted_steps").get<std::size_t>();
    r.trajectory.rejected_steps = tr.at("rejected_steps").get<std::size_t>();
    r.trajectory.rhs_evals = tr.at("rhs_evals").get<std::size_t>();
    const auto& rg = j.at("regularity");
    r.regularity.ok = rg.at("ok").get<bool>();
    r.regularity.r1 = rg.at("R1").get<bool>();
    r.regularity.r2 = rg.at("R2").get<bool>();
    r.regularity.invariance = rg.at("I").get<bool>();
    r.regularity.invariant_mod_X_only = rg.at("invariant_mod_X_only").get<bool>();
    r.regularity.points = rg.at("points").get<std::size_t>();
    r.regularity.max_cond_D = get_num(rg.at("max_cond_D"));
    r.regularity.max_residual = get_num(rg.at("max_residual"));
    r.regularity.min_field_norm = get_num(rg.at("min_field_norm"));
    r.regularity.failure = rg.at("failure").get<std::string>();
    r.conjugate_times = get_conj(j.at("conjugate_times"));
    if (!j.at("oracle_times").is_null()) r.oracle_times = get_conj(j.at("oracle_times"));
    r.min_sigma = get_opt(j.at("min_sigma_min"));
    r.bounds = get_bounds(j.at("bounds"));
    if (!j.at("sigma_bounds").is_null()) r.sigma_bounds = get_bounds(j.at("sigma_bounds"));
    if (!j.at("hamiltonian").is_null()) {
      const auto& h = j.at("hamiltonian");
      HamiltonianRecord hr;
      hr.lagrangian_residual = get_num(h.at("lagrangian_residual"));
      hr.semi_invariance_residual = get_num(h.at("semi_invariance_residual"));
      hr.metric = get_matrix(h.at("metric"));
      hr.metric_flipped = h.at("metric_flipped").get<bool>();
      hr.metric_definite = h.at("metric_definite").get<bool>();
      hr.metric_symmetry = get_num(h.at("metric_symmetry"));
      hr.selfadjoint_residual = get_num(h.at("selfadjoint_residual"));
      hr.horizontal_lagrangian = get_num(h.at("horizontal_lagrangian"));
      hr.metric_drift = get_num(h.at("metric_drift"));
      r.hamiltonian = hr;
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto& c = j.at("curves");
    r.curves.t = get_nums(c.at("t"));
    r.curves.sigma_min = get_nums(c.at("sigma_min_P"));
    r.curves.eig_re = get_matrix(c.at("k_eig_re"));
    r.curves.eig_im = get_matrix(c.at("k_eig_im"));
    r.curves.trK = get_nums(c.at("tr_K"));
    r.curves.detG = get_nums(c.at("det_G"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string curves_csv(const Curves& c) {
  std::ostringstream os;
  const std::size_t m = c.eig_re.empty() ? 0 : c.eig_re.front().size();
  os << "t,sigma_min_P";
  for (std::size_t i = 1; i <= m; ++i) os << ",k_eig_" << i << "_re,k_eig_" << i << "_im";
  os << ",tr_K,det_G\n";
  char buf[40];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    put(c.t[k]);
    os << ',';
    put(c.sigma_min[k]);
    for (std::size_t i = 0; i < m; ++i) {
      os << ',';
      put(c.eig_re[k][i]);
      os << ',';
      put(c.eig_im[k][i]);
    }
    os << ',';
    put(c.trK[k]);
    os << ',';
    put(c.detG[k]);
    os << '\n';
  }
  return os.str();
}

}  // namespace conjscope
