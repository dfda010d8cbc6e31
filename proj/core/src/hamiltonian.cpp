#include "conjscope/hamiltonian.hpp"

#include <cmath>
#include <span>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "conjscope/errors.hpp"

namespace conjscope {

namespace {

double max_abs(const Mat& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace

SigmaExprs complete_antisymmetric(const std::vector<std::vector<std::optional<Expr>>>& partial) {
  const std::size_t n = partial.size();
  SigmaExprs out(n, std::vector<Expr>(n, Expr::constant(0.0)));
  for (std::size_t i = 0; i < n; ++i) {
    if (partial[i].size() != n) throw PreconditionViolation("sigma must be square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (partial[i][i]) {
      const auto& d = *partial[i][i];
      if (!(d.root().op == Op::Const && d.root().value == 0.0)) {
        throw PreconditionViolation("diagonal entries of sigma must vanish");
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& up = partial[i][j];
      const auto& lo = partial[j][i];
      if (up && lo) throw PreconditionViolation("sigma entry given twice for one index pair");
      if (up) {
        out[i][j] = *up;
        out[j][i] = Expr(std::make_shared<Node>(Node{Op::Neg, 0.0, {}, 0, {up->root_ptr()}}));
      } else if (lo) {
        out[j][i] = *lo;
        out[i][j] = Expr(std::make_shared<Node>(Node{Op::Neg, 0.0, {}, 0, {lo->root_ptr()}}));
      }
    }
  }
  return out;
}

SemiHamiltonian::SemiHamiltonian(PairPtr pair, const SigmaExprs& sigma) : pair_(std::move(pair)) {
  const auto n = static_cast<std::size_t>(pair_->n());
  if (sigma.size() != n) throw PreconditionViolation("sigma must be n x n");
  for (const auto& row : sigma) {
    if (row.size() != n) throw PreconditionViolation("sigma must be n x n");
    for (const auto& e : row) entries_.emplace_back(e, pair_->coords(), pair_->generic().params);
  }
}

Mat SemiHamiltonian::sigma(const Vec& x) const {
  const int n = pair_->n();
  Mat S(n, n);
  const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) S(i, j) = entries_[static_cast<std::size_t>(i * n + j)].eval(xs);
  }
  if ((S + S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, max_abs(S))) {
    throw PreconditionViolation("sigma is not antisymmetric");
  }
  return S;
}

Mat SemiHamiltonian::sigma_derivative(const Vec& x, const Vec& v) const {
  const int n = pair_->n();
  std::vector<HyperDual> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seeds[static_cast<std::size_t>(k)] = HyperDual(x[k], v[k], 0.0, 0.0);
  Mat D(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      D(i, j) = entries_[static_cast<std::size_t>(i * n + j)].eval(std::span<const HyperDual>(seeds)).e1;
    }
  }
  return D;
}

double check_lagrangian(const SemiHamiltonian& model, const std::vector<Vec>& points) {
  double worst = 0.0;
  for (const auto& x : points) {
    const Mat S = model.sigma(x);
    const Mat V = model.pair().frame(x);
    const double scale = std::max(max_abs(S), 1e-300);
    const Mat W = V.transpose() * S * V;
    for (int i = 0; i < W.rows(); ++i) {
      for (int j = i + 1; j < W.cols(); ++j) {
        const double s = scale * V.col(i).norm() * V.col(j).norm();
        if (s > 0.0) worst = std::max(worst, std::abs(W(i, j)) / s);
      }
    }
  }
  return worst;
}

InducedMetric induced_metric(const SemiHamiltonian& model, const Vec& x) {
  if (check_lagrangian(model, {x}) > 1e-8) {
    throw PreconditionViolation("distribution is not Lagrangian for sigma");
  }
  const PointFrameData d = frame_data(model.pair(), x);
  const Mat S = model.sigma(x);
  InducedMetric out;
  Mat g = d.XV.transpose() * S * d.V;
  const double gn = g.norm();
  out.symmetry_residual = gn == 0.0 ? 0.0 : (g - g.transpose()).norm() / gn;
  Eigen::JacobiSVD<Mat> svd(g);
  const Vec& sv = svd.singularValues();
  out.min_abs_eigenvalue = sv[sv.size() - 1];
  if (!(sv[sv.size() - 1] >= 1e-10 * std::max(gn, 1e-300)) || gn == 0.0) {
    throw DegenerateMetric("induced metric is degenerate");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const bool negative = ev.maxCoeff() < 0.0;
  const bool positive = ev.minCoeff() > 0.0;
  out.definite = negative || positive;
  if (negative) {
    g = -g;
    out.flipped = true;
  }
  out.g = g;
  return out;
}

double check_semi_invariance(const SemiHamiltonian& model, const std::vector<Vec>& points) {
  double worst = 0.0;
  const DynamicPair& pair = model.pair();
  for (const auto& x : points) {
    const PointFrameData d = frame_data(pair, x);
    Mat Y(pair.n(), 2 * pair.m());
    Y << d.V, d.XV;
    const Mat S = model.sigma(x);
    const Mat JX = pair.X().jacobian(x);
    const Mat DS = model.sigma_derivative(x, pair.field(x));
    // (L_X σ)(Y, Z) = Dσ[X](Y, Z) + σ(DX·Y, Z) + σ(Y, DX·Z)
    const Mat a = Y.transpose() * DS * Y;
    const Mat b = (JX * Y).transpose() * S * Y;
    const Mat c = Y.transpose() * S * (JX * Y);
    const Mat R = a + b + c;
    for (int i = 0; i < R.rows(); ++i) {
      for (int j = 0; j < R.cols(); ++j) {
        const double scale = std::abs(a(i, j)) + std::abs(b(i, j)) + std::abs(c(i, j));
        const double size = Y.col(i).norm() * Y.col(j).norm() * std::max(max_abs(S), 1e-300);
        const double denom = std::max(scale, size);
        if (denom > 0.0) worst = std::max(worst, std::abs(R(i, j)) / denom);
      }
    }
  }
  return worst;
}

double check_K_selfadjoint(const Mat& g, const Mat& K) {
  const Mat gK = g * K;
  const double n = gK.norm();
  return n == 0.0 ? 0.0 : (gK - gK.transpose()).norm() / n;
}

double horizontal_lagrangian_residual(const SemiHamiltonian& model, const Vec& x, const Mat& G) {
  const PointFrameData d = frame_data(model.pair(), x);
  const Mat H = (d.XV - 0.5 * d.V * d.H1) * G;
  const Mat S = model.sigma(x);
  const Mat W = H.transpose() * S * H;
  double worst = 0.0;
  const double scale = std::max(max_abs(S), 1e-300);
  for (int i = 0; i < W.rows(); ++i) {
    for (int j = i + 1; j < W.cols(); ++j) {
      const double s = scale * H.col(i).norm() * H.col(j).norm();
      if (s > 0.0) worst = std::max(worst, std::abs(W(i, j)) / s);
    }
  }
  return worst;
}

Mat induced_metric_normal(const SemiHamiltonian& model, const FrameTransport& ft, double t) {
  const Mat G = ft.G(t);
  return G.transpose() * induced_metric(model, ft.x(t)).g * G;
}

}  // namespace conjscope
