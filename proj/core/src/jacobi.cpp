#include "conjscope/jacobi.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "conjscope/errors.hpp"

namespace conjscope {

namespace {

double signed_sigma_min(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  const double smin = svd.singularValues()[svd.singularValues().size() - 1];
  const double det = M.determinant();
  return det < 0.0 ? -smin : smin;
}

// XV columns only; the oracle has no use for XXV.
Mat xv_columns(const DynamicPair& pair, const Vec& x) {
  const Vec Xv = pair.field(x);
  const Mat JX = pair.X().jacobian(x);
  Mat XV(pair.n(), pair.m());
  for (int i = 0; i < pair.m(); ++i) {
    const VectorField& Vi = pair.V(i);
    const Vec v = Vi.value(x);
    const Vec dv = Vi.is_constant() ? Vec::Zero(pair.n()) : Vec(Vi.jacobian(x) * Xv);
    XV.col(i) = dv - JX * v;
  }
  return XV;
}

}  // namespace

JacobiSolution::JacobiSolution(MatrixFunction K, int m, Trajectory traj)
    : K_(std::move(K)), m_(m), traj_(std::move(traj)) {}

Mat JacobiSolution::P(double t) const {
  if (t == 0.0) return Mat::Zero(m_, m_);
  const Vec s = traj_.eval(t);
  return Eigen::Map<const Mat>(s.data(), m_, m_);
}

Mat JacobiSolution::Q(double t) const {
  if (t == 0.0) return Mat::Identity(m_, m_);
  const Vec s = traj_.eval(t);
  return Eigen::Map<const Mat>(s.data() + m_ * m_, m_, m_);
}

double JacobiSolution::sigma_min(double t) const {
  Eigen::JacobiSVD<Mat> svd(P(t));
  return svd.singularValues()[m_ - 1];
}

JacobiSolution integrate_jacobi(MatrixFunction K, int m, double T, const IntegratorOptions& options) {
  if (m < 1) throw PreconditionViolation("Jacobi system needs m >= 1");
  const int mm = m * m;
  Vec s0 = Vec::Zero(2 * mm);
  for (int i = 0; i < m; ++i) s0[mm + i * m + i] = 1.0;
  Rhs rhs = [&K, m, mm](double t, const Vec& s, Vec& ds) {
    ds.resize(s.size());
    const Eigen::Map<const Mat> P(s.data(), m, m);
    ds.head(mm) = s.tail(mm);
    const Mat KP = K(t) * P;
    ds.tail(mm) = -Eigen::Map<const Vec>(KP.data(), mm);
  };
  Trajectory traj = integrate(rhs, s0, 0.0, T, options);
  return JacobiSolution(std::move(K), m, std::move(traj));
}

std::vector<ConjugateTime> detect_rank_drops(const MatrixFunction& M, const std::vector<double>& grid,
                                             double rank_tol) {
  std::vector<ConjugateTime> out;
  if (grid.size() < 2) return out;

  std::vector<double> running_max(grid.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::JacobiSVD<Mat> svd(M(grid[i]));
    acc = std::max(acc, svd.singularValues()[0]);
    running_max[i] = acc;
  }

  const auto f = [&M](double t) { return signed_sigma_min(M(t)); };
  for (const Event& ev : locate_events(f, grid)) {
    if (ev.t <= kMergeTolerance) continue;
    const auto it = std::upper_bound(grid.begin(), grid.end(), ev.t);
    const std::size_t idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - grid.begin()) - 1));
    const Mat Mt = M(ev.t);
    Eigen::JacobiSVD<Mat> svd(Mt, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const double scale = std::max(running_max[idx], sv[0]);
    ConjugateTime ct;
    ct.t_star = ev.t;
    ct.mode = ev.mode;
    const int m = static_cast<int>(sv.size());
    int count = 0;
    for (int k = 0; k < m; ++k) {
      if (sv[k] < rank_tol * scale) {
        ++count;
        ct.kernel_basis.push_back(svd.matrixV().col(k));
      }
    }
    if (count == 0) ct.kernel_basis.push_back(svd.matrixV().col(m - 1));
    ct.multiplicity = std::max(count, 1);
    if (!out.empty() && ct.t_star - out.back().t_star < kMergeTolerance) {
      if (ct.multiplicity > out.back().multiplicity) out.back() = std::move(ct);
      continue;
    }
    out.push_back(std::move(ct));
  }
  return out;
}

std::vector<ConjugateTime> find_conjugate_times(const JacobiSolution& js, double rank_tol) {
  return detect_rank_drops([&js](double t) { return js.P(t); }, js.sample_times(), rank_tol);
}

std::optional<double> windowed_minimum(const std::function<double(double)>& f,
                                       const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  if (n < 2) return std::nullopt;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(grid[i]);
  std::optional<double> best;
  const auto take = [&best](double value) {
    if (!best || value < *best) best = value;
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (v[i] <= v[i - 1] && v[i] <= v[i + 1] && (v[i] < v[i - 1] || v[i] < v[i + 1])) {
      const double t = golden_section_minimum(f, grid[i - 1], grid[i + 1]);
      take(std::min(f(t), v[i]));
    }
  }
  if (v[n - 1] < v[n - 2]) take(v[n - 1]);
  return best;
}

double index_functional(const MatrixFunction& K, const std::vector<Vec>& w, double r) {
  const std::size_t N = w.size();
  if (N < 3 || N % 2 == 0) throw PreconditionViolation("index functional needs an odd number (>= 3) of samples");
  if (!(r > 0.0)) throw PreconditionViolation("index functional needs r > 0");
  const auto m = w.front().size();
  double wmax = 0.0;
  for (const auto& s : w) wmax = std::max(wmax, s.cwiseAbs().maxCoeff());
  if (w.front().cwiseAbs().maxCoeff() > 1e-10 * wmax || w.back().cwiseAbs().maxCoeff() > 1e-10 * wmax) {
    throw EndpointNotZero("section must vanish at both ends");
  }
  const double h = r / static_cast<double>(N - 1);

  std::vector<Vec> dw(N, Vec::Zero(m));
  std::vector<double> comp(N);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (std::size_t k = 0; k < N; ++k) comp[k] = w[k][c];
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(comp.begin(), comp.end(), 0.0, h);
    for (std::size_t k = 0; k < N; ++k) dw[k][c] = spline.prime(static_cast<double>(k) * h);
  }

  double total = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double t = static_cast<double>(k) * h;
    const double integrand = dw[k].squaredNorm() - (K(t) * w[k]).dot(w[k]);
    const double weight = (k == 0 || k == N - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    total += weight * integrand;
  }
  return total * h / 3.0;
}

OracleResult variational_oracle(const DynamicPair& pair, const Vec& x0, double T,
                                const IntegratorOptions& options, double rank_tol) {
  const int n = pair.n();
  const int m = pair.m();
  if (x0.size() != n) throw PreconditionViolation("initial point has the wrong dimension");
  const int nn = n * n;
  Vec s0(n + nn);
  s0.head(n) = x0;
  s0.tail(nn) = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), nn);
  Rhs rhs = [&pair, n, nn](double, const Vec& s, Vec& ds) {
    ds.resize(s.size());
    const Vec x = s.head(n);
    ds.head(n) = pair.field(x);
    const Mat dPhi = pair.X().jacobian(x) * Eigen::Map<const Mat>(s.data() + n, n, n);
    ds.tail(nn) = Eigen::Map<const Vec>(dPhi.data(), nn);
  };
  OracleResult res;
  res.flow = integrate(rhs, s0, 0.0, T, options);

  const Mat V0 = pair.frame(x0);
  const bool with_X = n == 2 * m + 1;
  const Trajectory& flow = res.flow;
  const MatrixFunction block = [&](double t) {
    const Vec s = flow.eval(t);
    const Vec x = s.head(n);
    const Mat Phi = Eigen::Map<const Mat>(s.data() + n, n, n);
    Mat B(n, 2 * m + (with_X ? 1 : 0));
    if (with_X) {
      B << pair.frame(x), xv_columns(pair, x), pair.field(x);
    } else {
      B << pair.frame(x), xv_columns(pair, x);
    }
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    if (!(sv[sv.size() - 1] * kMaxFrameCondition >= sv[0])) {
      throw RegularityViolation("R2", "decomposition basis is ill-conditioned at t = " + std::to_string(t));
    }
    const Mat coeffs = svd.solve(Phi * V0);
    return Mat(coeffs.middleRows(m, m));
  };
  res.times = detect_rank_drops(block, flow.sample_times(), rank_tol);
  return res;
}

}  // namespace conjscope
