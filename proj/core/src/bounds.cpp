#include "conjscope/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
// pchip.hpp in Boost 1.74 calls isnan unqualified.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "conjscope/errors.hpp"

namespace conjscope {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent:
      return "consistent";
    case Verdict::Violated:
      return "violated";
    case Verdict::NotApplicable:
      break;
  }
  return "not_applicable";
}

Verdict parse_verdict(const std::string& s) {
  if (s == "consistent") return Verdict::Consistent;
  if (s == "violated") return Verdict::Violated;
  if (s == "not_applicable") return Verdict::NotApplicable;
  throw PreconditionViolation("unknown verdict '" + s + "'");
}

Mat g_orthonormal(const Mat& K, const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DegenerateMetric("metric is not positive definite");
  const Mat L = llt.matrixL();
  const Mat LT = L.transpose();
  // Lᵀ K L⁻ᵀ = (L⁻¹ (Lᵀ K)ᵀ)ᵀ
  const Mat LtK = LT * K;
  return L.triangularView<Eigen::Lower>().solve(LtK.transpose()).transpose();
}

double symmetry_residual(const Mat& K, const Mat& g) {
  const Mat gK = g * K;
  const double nrm = gK.norm();
  if (nrm == 0.0) return 0.0;
  return (gK - gK.transpose()).norm() / nrm;
}

Theorem1Result theorem1_interval(const std::vector<Mat>& K, const std::vector<Mat>& g, double T) {
  Theorem1Result r;
  r.lambda = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K.size(); ++i) {
    const Mat Kt = g_orthonormal(K[i], g[i]);
    const Mat S = 0.5 * (Kt + Kt.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    r.lambda = std::max(r.lambda, es.eigenvalues().maxCoeff());
  }
  if (K.empty()) r.lambda = 0.0;
  r.t_c = r.lambda <= 0.0 ? T : std::min(T, std::numbers::pi / std::sqrt(r.lambda));
  return r;
}

Theorem2Result theorem2_bound(const std::vector<Mat>& K, const std::vector<Mat>& g, int m, double T) {
  Theorem2Result r;
  r.kappa = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K.size(); ++i) {
    r.kappa = std::min(r.kappa, K[i].trace());
    r.symmetry_residual = std::max(r.symmetry_residual, symmetry_residual(K[i], g[i]));
  }
  if (K.empty()) {
    r.kappa = 0.0;
    r.reason = "no samples";
    return r;
  }
  if (r.symmetry_residual > kSymmetryTolerance) {
    r.reason = "curvature is not self-adjoint for the metric";
    return r;
  }
  if (!(r.kappa > 0.0)) {
    r.reason = "inf tr K is not positive";
    return r;
  }
  const double Ts = std::numbers::pi * std::sqrt(static_cast<double>(m) / r.kappa);
  if (!(Ts < T)) {
    r.reason = "T* lies beyond the time horizon";
    return r;
  }
  r.T_star = Ts;
  return r;
}

std::vector<Eigenline> detect_parallel_eigenlines(const std::vector<Mat>& K) {
  std::vector<Eigenline> lines;
  if (K.empty()) return lines;
  Eigen::EigenSolver<Mat> es(K.front());
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    if (std::abs(vals[k].imag()) > 1e-9 * std::max(1.0, std::abs(vals[k]))) continue;
    Vec e = vecs.col(k).real();
    if (e.norm() == 0.0) continue;
    e.normalize();
    // Fix the sign so the output does not depend on the solver's choice.
    Eigen::Index lead = 0;
    e.cwiseAbs().maxCoeff(&lead);
    if (e[lead] < 0.0) e = -e;
    bool duplicate = false;
    for (const auto& l : lines) duplicate = duplicate || std::abs(std::abs(l.direction.dot(e)) - 1.0) < 1e-12;
    if (duplicate) continue;

    Eigenline line;
    line.direction = e;
    bool ok = true;
    for (const auto& Kt : K) {
      const Vec Ke = Kt * e;
      const double lam = e.dot(Ke);
      if ((Ke - lam * e).norm() > kEigenlineTolerance * Kt.norm() + 1e-12) {
        ok = false;
        break;
      }
      line.lambda.push_back(lam);
    }
    if (ok) lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<double> sturm_zeros(const std::function<double(double)>& lambda, double T,
                                const IntegratorOptions& options) {
  Vec y0(2);
  y0 << 0.0, 1.0;
  Rhs rhs = [&lambda](double t, const Vec& s, Vec& ds) {
    ds.resize(2);
    ds[0] = s[1];
    ds[1] = -lambda(t) * s[0];
  };
  const Trajectory traj = integrate(rhs, y0, 0.0, T, options);
  const std::vector<double> grid = traj.sample_times();
  std::vector<double> zeros;
  for (const Event& e : locate_events([&traj](double t) { return traj.eval(t)[0]; }, grid)) {
    if (e.mode == EventMode::SignChange && e.t > kMergeTolerance) zeros.push_back(e.t);
  }
  return zeros;
}

std::vector<double> sturm_zeros(const std::vector<double>& t, const std::vector<double>& lambda,
                                double T, const IntegratorOptions& options) {
  if (t.size() != lambda.size() || t.size() < 4) {
    throw PreconditionViolation("eigenvalue track needs at least four samples");
  }
  std::vector<double> ts;
  std::vector<double> ls;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!ts.empty() && t[i] <= ts.back()) continue;
    ts.push_back(t[i]);
    ls.push_back(lambda[i]);
  }
  const double lo = ts.front();
  const double hi = ts.back();
  const auto interp = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
      std::move(ts), std::move(ls));
  return sturm_zeros([interp, lo, hi](double s) { return (*interp)(std::clamp(s, lo, hi)); }, T, options);
}

BoundsReport evaluate_bounds(const MatrixFunction& K, const MatrixFunction& g,
                             const std::vector<double>& times, double T,
                             const std::vector<ConjugateTime>& detected,
                             const IntegratorOptions& options) {
  BoundsReport rep;
  std::vector<Mat> Ks;
  std::vector<Mat> gs;
  Ks.reserve(times.size());
  gs.reserve(times.size());
  for (double t : times) {
    Ks.push_back(K(t));
    gs.push_back(g(t));
  }
  const int m = Ks.empty() ? 0 : static_cast<int>(Ks.front().rows());

  const Theorem1Result t1 = theorem1_interval(Ks, gs, T);
  rep.lambda_max = t1.lambda;
  rep.t_c = t1.t_c;
  rep.thm1 = Verdict::Consistent;
  for (const auto& c : detected) {
    if (c.t_star < t1.t_c - kBoundSlack) {
      rep.thm1 = Verdict::Violated;
      rep.notes.push_back("conjugate time " + std::to_string(c.t_star) + " inside the safe interval");
    }
  }

  const Theorem2Result t2 = theorem2_bound(Ks, gs, m, T);
  rep.trK_min = t2.kappa;
  rep.symmetry_residual = t2.symmetry_residual;
  rep.T_star = t2.T_star;
  rep.thm2_reason = t2.reason;
  if (t2.T_star) {
    const bool hit = std::any_of(detected.begin(), detected.end(), [&](const ConjugateTime& c) {
      return c.t_star > 0.0 && c.t_star <= *t2.T_star + kBoundSlack;
    });
    rep.thm2 = hit ? Verdict::Consistent : Verdict::Violated;
    if (!hit) rep.notes.push_back("no conjugate time up to T*");
  }

  const auto lines = detect_parallel_eigenlines(Ks);
  std::vector<std::pair<double, std::size_t>> all_zeros;
  for (const auto& line : lines) {
    EigenlineTrack tr;
    tr.direction = line.direction;
    tr.kappa = *std::min_element(line.lambda.begin(), line.lambda.end());
    tr.lambda_max = *std::max_element(line.lambda.begin(), line.lambda.end());
    if (tr.kappa > 0.0) tr.predicted = std::numbers::pi / std::sqrt(tr.kappa);
    const Vec e = line.direction;
    tr.sturm_zeros = sturm_zeros([&K, e](double t) { return e.dot(K(t) * e); }, T, options);
    for (double z : tr.sturm_zeros) all_zeros.emplace_back(z, rep.tracks.size());
    rep.tracks.push_back(std::move(tr));
  }
  if (!rep.tracks.empty()) {
    rep.thm3 = Verdict::Consistent;
    for (const auto& tr : rep.tracks) {
      if (tr.predicted && *tr.predicted <= T - kBoundSlack &&
          (tr.sturm_zeros.empty() || tr.sturm_zeros.front() > *tr.predicted + kBoundSlack)) {
        rep.thm3 = Verdict::Violated;
        rep.notes.push_back("eigenline track without a zero before pi/sqrt(kappa)");
      }
    }
    std::sort(all_zeros.begin(), all_zeros.end());
    for (std::size_t i = 0; i < all_zeros.size();) {
      std::size_t j = i + 1;
      while (j < all_zeros.size() && all_zeros[j].first - all_zeros[i].first < kBoundSlack) ++j;
      const double z = all_zeros[i].first;
      const int coincident = static_cast<int>(j - i);
      const auto match = std::find_if(detected.begin(), detected.end(), [&](const ConjugateTime& c) {
        return std::abs(c.t_star - z) <= kBoundSlack;
      });
      if (match == detected.end()) {
        // A zero sitting on the horizon may be missed by the detector.
        if (z < T - kBoundSlack) {
          rep.thm3 = Verdict::Violated;
          rep.notes.push_back("Sturm zero " + std::to_string(z) + " has no matching conjugate time");
        }
      } else if (match->multiplicity < coincident) {
        rep.thm3 = Verdict::Violated;
        rep.notes.push_back("coincident Sturm zeros at " + std::to_string(z) + " exceed the multiplicity");
      }
      i = j;
    }
  }
  return rep;
}

}  // namespace conjscope
