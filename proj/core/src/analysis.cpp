#include "conjscope/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/Eigenvalues>

#include "conjscope/bounds.hpp"
#include "conjscope/errors.hpp"
#include "conjscope/frames.hpp"

namespace conjscope {

namespace {

// Regularity is checked on at most this many points along the curve.
constexpr std::size_t kRegularityPoints = 256;

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Matrix to_rows(const Mat& M) {
  Matrix out(static_cast<std::size_t>(M.rows()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(M(i, j));
  }
  return out;
}

std::vector<ConjugateRecord> records(const std::vector<ConjugateTime>& times) {
  std::vector<ConjugateRecord> out;
  for (const auto& c : times) {
    ConjugateRecord r;
    r.t = c.t_star;
    r.multiplicity = c.multiplicity;
    r.mode = to_string(c.mode);
    for (const auto& k : c.kernel_basis) r.kernel.push_back(to_std(k));
    out.push_back(std::move(r));
  }
  return out;
}

BoundsRecord bounds_record(const BoundsReport& b, std::string metric) {
  BoundsRecord r;
  r.metric = std::move(metric);
  r.lambda_max = b.lambda_max;
  r.trK_min = b.trK_min;
  r.symmetry_residual = b.symmetry_residual;
  r.t_c = b.t_c;
  r.T_star = b.T_star;
  r.thm2_reason = b.thm2_reason;
  for (const auto& t : b.tracks) {
    r.tracks.push_back({to_std(t.direction), t.kappa, t.lambda_max, t.predicted, t.sturm_zeros});
  }
  r.thm1 = to_string(b.thm1);
  r.thm2 = to_string(b.thm2);
  r.thm3 = to_string(b.thm3);
  r.notes = b.notes;
  return r;
}

std::vector<double> subsample(const std::vector<double>& grid, std::size_t cap) {
  if (grid.size() <= cap) return grid;
  std::vector<double> out;
  const double stride = static_cast<double>(grid.size() - 1) / static_cast<double>(cap - 1);
  for (std::size_t k = 0; k < cap; ++k) {
    out.push_back(grid[static_cast<std::size_t>(std::lround(stride * static_cast<double>(k)))]);
  }
  return out;
}

std::string describe(const RegularityReport& r) {
  if (!r.r1) return "R1: the field X vanishes on the curve";
  if (!r.r2) return "R2: V and [X, V] are not independent (cond " + std::to_string(r.max_cond_D) + ")";
  if (!r.invariance) {
    std::string s = "I: [X, [X, V]] leaves span(V, [X, V]) (residual " + std::to_string(r.max_residual) + ")";
    if (r.mod_X_only) s += "; invariant once X is admitted";
    return s;
  }
  return {};
}

}  // namespace

SystemSpec from_catalog(const BuiltSystem& built) {
  SystemSpec s;
  s.name = built.name;
  s.params = built.params;
  s.model = built.model;
  s.sigma = built.sigma;
  s.check_initial = built.check_initial;
  s.default_x0 = built.default_x0;
  s.default_T = built.default_T;
  return s;
}

Vec full_initial_point(const DynamicPair& pair, const Vec& x0) {
  if (x0.size() == pair.n()) return x0;
  if (pair.sode() && pair.t_index() >= 0 && x0.size() == pair.n() - 1) {
    Vec full(pair.n());
    full << 0.0, x0;
    return full;
  }
  throw PreconditionViolation("initial point has " + std::to_string(x0.size()) +
                              " components, expected " + std::to_string(pair.n()));
}

AnalysisReport analyze(const SystemSpec& spec, const Vec& x0_in, double T,
                       const AnalysisOptions& options) {
  if (!(T > 0.0) || !std::isfinite(T)) throw PreconditionViolation("T must be positive and finite");
  const auto pair = std::make_shared<const DynamicPair>(spec.model);
  const Vec x0 = full_initial_point(*pair, x0_in);
  if (spec.check_initial) spec.check_initial(x0);
  const int m = pair->m();
  const int per_step = std::max(1, options.samples_per_step);

  AnalysisReport rep;
  rep.system = spec.name;
  rep.params.insert(spec.params.begin(), spec.params.end());
  rep.m = m;
  rep.n = pair->n();
  rep.trajectory.x0 = to_std(x0);
  rep.trajectory.T = T;
  rep.trajectory.rel_tol = options.integrator.rel_tol;
  rep.trajectory.abs_tol = options.integrator.abs_tol;
  rep.trajectory.rank_tol = options.rank_tol;

  // Regularity along the curve before anything that relies on it.
  const Trajectory curve = integrate([&](const Vec& x) { return pair->field(x); }, x0, T, options.integrator);
  std::vector<Vec> points;
  for (double t : subsample(curve.sample_times(1), kRegularityPoints)) points.push_back(curve.eval(t));
  const RegularityReport reg = check_regularity(*pair, points);
  auto& rs = rep.regularity;
  rs.ok = reg.ok();
  rs.r1 = reg.r1;
  rs.r2 = reg.r2;
  rs.invariance = reg.invariance;
  rs.invariant_mod_X_only = reg.mod_X_only;
  rs.points = reg.points.size();
  rs.max_cond_D = reg.max_cond_D;
  rs.max_residual = reg.max_residual;
  rs.min_field_norm = reg.min_field_norm;
  if (!reg.ok()) {
    rs.failure = describe(reg);
    const auto& st = curve.stats();
    rep.trajectory.accepted_steps = st.accepted;
    rep.trajectory.rejected_steps = st.rejected;
    rep.trajectory.rhs_evals = st.rhs_evals;
    return rep;
  }

  std::optional<FrameTransport> ft;
  try {
    ft.emplace(transport_normal_frame(pair, x0, T, options.G0, options.integrator));
  } catch (const RegularityViolation& e) {
    rs.ok = false;
    rs.failure = e.what();
    return rep;
  }
  const auto& st = ft->joint().stats();
  rep.trajectory.accepted_steps = st.accepted;
  rep.trajectory.rejected_steps = st.rejected;
  rep.trajectory.rhs_evals = st.rhs_evals;

  const MatrixFunction K = [&ft](double t) { return ft->K_normal(t); };
  const JacobiSolution js = integrate_jacobi(K, m, T, options.integrator);
  const auto detected = find_conjugate_times(js, options.rank_tol);
  rep.conjugate_times = records(detected);

  if (options.run_oracle) {
    try {
      rep.oracle_times = records(variational_oracle(*pair, x0, T, options.integrator, options.rank_tol).times);
    } catch (const RegularityViolation& e) {
      rep.warnings.push_back(std::string("variational oracle skipped: ") + e.what());
    }
  }

  const std::vector<double> grid = js.sample_times(per_step);
  rep.min_sigma = windowed_minimum([&js](double t) { return js.sigma_min(t); }, grid);

  const MatrixFunction identity = [m](double) { return Mat::Identity(m, m).eval(); };
  const BoundsReport b = evaluate_bounds(K, identity, grid, T, detected, options.integrator);
  rep.bounds = bounds_record(b, "normal-frame");
  if (b.symmetry_residual > kSymmetryTolerance) {
    rep.warnings.push_back("K is not self-adjoint for the normal-frame metric (residual " +
                           std::to_string(b.symmetry_residual) + ")");
  }

  if (spec.sigma) {
    try {
      const SemiHamiltonian sh(pair, *spec.sigma);
      HamiltonianRecord h;
      h.lagrangian_residual = check_lagrangian(sh, points);
      h.semi_invariance_residual = check_semi_invariance(sh, points);
      const InducedMetric im = induced_metric(sh, x0);
      h.metric = to_rows(im.g);
      h.metric_flipped = im.flipped;
      h.metric_definite = im.definite;
      h.metric_symmetry = im.symmetry_residual;
      const MatrixFunction gn = [&sh, &ft](double t) { return induced_metric_normal(sh, *ft, t); };
      const Mat g0 = gn(0.0);
      for (double t : subsample(grid, kRegularityPoints)) {
        const Mat g = gn(t);
        h.selfadjoint_residual = std::max(h.selfadjoint_residual, check_K_selfadjoint(g, K(t)));
        h.horizontal_lagrangian =
            std::max(h.horizontal_lagrangian, horizontal_lagrangian_residual(sh, ft->x(t), ft->G(t)));
        h.metric_drift = std::max(h.metric_drift, (g - g0).norm() / g0.norm());
      }
      rep.hamiltonian = h;
      if (im.definite) {
        const BoundsReport sb = evaluate_bounds(K, gn, grid, T, detected, options.integrator);
        rep.sigma_bounds = bounds_record(sb, "sigma");
      } else {
        rep.warnings.push_back("induced metric is indefinite; sigma bounds skipped");
      }
    } catch (const PreconditionViolation& e) {
      rep.warnings.push_back(std::string("semi-Hamiltonian checks skipped: ") + e.what());
    } catch (const DegenerateMetric& e) {
      rep.warnings.push_back(std::string("semi-Hamiltonian checks skipped: ") + e.what());
    }
  }

  auto& c = rep.curves;
  for (double t : grid) {
    const Mat Kt = K(t);
    Eigen::EigenSolver<Mat> es(Kt, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + m);
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    std::vector<double> re, im;
    for (const auto& z : ev) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    c.t.push_back(t);
    c.sigma_min.push_back(js.sigma_min(t));
    c.eig_re.push_back(std::move(re));
    c.eig_im.push_back(std::move(im));
    c.trK.push_back(Kt.trace());
    c.detG.push_back(ft->det_G(t));
  }

  if (pair->t_index() < 0) {
    const double scale = 1.0 + x0.norm();
    const auto dist = [&](double t) { return (curve.eval(t) - x0).norm(); };
    const std::vector<double> ts = curve.sample_times(per_step);
    for (std::size_t k = 1; k + 1 < ts.size(); ++k) {
      if (ts[k] <= 0.1 * T || dist(ts[k]) > dist(ts[k - 1]) || dist(ts[k]) > dist(ts[k + 1])) continue;
      const double t = golden_section_minimum(dist, ts[k - 1], ts[k + 1]);
      if (dist(t) < 1e-6 * scale) {
        rep.warnings.push_back("trajectory returns to x0 near t = " + std::to_string(t) +
                               "; the orbit is closed");
        break;
      }
    }
  }
  return rep;
}

}  // namespace conjscope
