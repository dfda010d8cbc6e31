#pragma once

#include <optional>
#include <vector>

#include "conjscope/expr.hpp"
#include "conjscope/frames.hpp"
#include "conjscope/linalg.hpp"
#include "conjscope/pair.hpp"

namespace conjscope {

/// n x n coordinate matrix of a 2-form; sigma[i][j] = σ(∂_i, ∂_j).
using SigmaExprs = std::vector<std::vector<Expr>>;

/// Fills missing (empty-named) lower or upper entries by antisymmetry. Every
/// pair (i, j) must be given at most once; diagonal entries default to 0.
SigmaExprs complete_antisymmetric(const std::vector<std::vector<std::optional<Expr>>>& partial);

/// A dynamic pair with a 2-form σ. σ is only contracted with vectors of D.
class SemiHamiltonian {
 public:
  SemiHamiltonian(PairPtr pair, const SigmaExprs& sigma);

  const DynamicPair& pair() const { return *pair_; }
  const PairPtr& pair_ptr() const { return pair_; }

  /// σ at x; throws PreconditionViolation when it is not antisymmetric to
  /// 1e-12 relative.
  Mat sigma(const Vec& x) const;
  /// Directional derivative of the matrix σ along v.
  Mat sigma_derivative(const Vec& x, const Vec& v) const;

 private:
  PairPtr pair_;
  std::vector<ExprProgram> entries_;  // row-major
};

/// max over points and i < j of |σ(V_i, V_j)| / (max|σ| · |V_i| · |V_j|).
double check_lagrangian(const SemiHamiltonian& model, const std::vector<Vec>& points);

struct InducedMetric {
  Mat g;                       // sign-normalised when negative definite
  bool flipped = false;
  bool definite = false;
  double symmetry_residual = 0.0;
  double min_abs_eigenvalue = 0.0;
};

/// g_ij = σ([X, V_i], V_j). Requires the Lagrangian condition at x
/// (residual ≤ 1e-8), throws DegenerateMetric when the smallest singular
/// value is below 1e-10·‖g‖.
InducedMetric induced_metric(const SemiHamiltonian& model, const Vec& x);

/// Relative residual of X(σ(Y,Z)) = σ([X,Y],Z) + σ(Y,[X,Z]) over pairs of
/// basis fields Y, Z of D = span{V, XV}. The identity reduces to
/// (L_X σ)(Y, Z) = 0, which needs only DX and Dσ along X.
double check_semi_invariance(const SemiHamiltonian& model, const std::vector<Vec>& points);

/// ‖gK - (gK)ᵀ‖ / ‖gK‖.
double check_K_selfadjoint(const Mat& g, const Mat& K);

/// |σ(H_i, H_j)| relative, for the horizontal frame XV - V·H1/2 carried by G.
double horizontal_lagrangian_residual(const SemiHamiltonian& model, const Vec& x, const Mat& G);

/// Gᵀ·g(c(t))·G, the induced metric in the transported normal frame.
Mat induced_metric_normal(const SemiHamiltonian& model, const FrameTransport& ft, double t);

}  // namespace conjscope
