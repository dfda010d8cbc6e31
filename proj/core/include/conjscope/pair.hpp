#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conjscope/expr.hpp"
#include "conjscope/linalg.hpp"
#include "conjscope/vector_field.hpp"

namespace conjscope {

// Numerical guards for the regularity conditions.
inline constexpr double kMaxFrameCondition = 1e8;     // (R2)
inline constexpr double kInvarianceTolerance = 1e-6;  // (I), relative residual
inline constexpr double kMinFieldNorm = 1e-12;        // (R1)

/// Second-order system x'' = F(t, x, x') in natural coordinates
/// (t, x1..xm, y1..ym). The t coordinate is dropped when autonomous.
struct SodeModel {
  int m = 0;
  std::vector<Expr> F;
  bool autonomous = true;
  ParamMap params;

  std::vector<std::string> coords() const;
};

/// Builds a SODE model. `autonomous` defaults to "no component mentions t";
/// requesting autonomous=true for a t-dependent F is a precondition error.
SodeModel make_sode(std::vector<Expr> F, ParamMap params = {},
                    std::optional<bool> autonomous = std::nullopt);
SodeModel make_sode(const std::vector<std::string>& F, ParamMap params = {},
                    std::optional<bool> autonomous = std::nullopt);

/// A vector field X and a frame V_1..V_m of the distribution, all given by
/// coordinate expressions. V[j] holds the n components of V_j.
struct GenericModel {
  std::vector<std::string> coords;
  std::vector<Expr> X;
  std::vector<std::vector<Expr>> V;
  ParamMap params;
};

using DynamicPairModel = std::variant<SodeModel, GenericModel>;

/// X = ∂t + y·∂x + F·∂y with V_j = ∂y_j.
GenericModel lift_sode(const SodeModel& model);

/// Replaces the working frame V by V·G for a constant invertible G.
GenericModel change_frame(const GenericModel& model, const Mat& G);

/// Compiled dynamic pair. Immutable and safe to share between threads.
class DynamicPair {
 public:
  explicit DynamicPair(const DynamicPairModel& model);

  int n() const { return X_.dim(); }
  int m() const { return static_cast<int>(V_.size()); }
  const std::vector<std::string>& coords() const { return generic_.coords; }
  const GenericModel& generic() const { return generic_; }
  const std::optional<SodeModel>& sode() const { return sode_; }

  const VectorField& X() const { return X_; }
  const VectorField& V(int j) const { return V_[static_cast<std::size_t>(j)]; }

  Vec field(const Vec& x) const { return X_.value(x); }
  Mat frame(const Vec& x) const;

  /// H1 only. For SODE models this is -F_y and skips the bracket solve.
  Mat H1(const Vec& x) const;

  // SODE internals: F compiled over coords().
  const std::vector<ExprProgram>& sode_programs() const { return F_; }
  int t_index() const { return t_index_; }
  int x_index(int i) const { return x_offset_ + i; }
  int y_index(int i) const { return x_offset_ + sode_->m + i; }

 private:
  GenericModel generic_;
  std::optional<SodeModel> sode_;
  VectorField X_;
  std::vector<VectorField> V_;
  std::vector<ExprProgram> F_;
  int t_index_ = -1;
  int x_offset_ = 0;
};

using PairPtr = std::shared_ptr<const DynamicPair>;

/// Lie bracket of two expression fields at x.
inline Vec bracket(const DynamicPair&, const VectorField& a, const VectorField& b, const Vec& x) {
  return bracket(a, b, x);
}

/// Everything the curvature needs at one point.
struct PointFrameData {
  Vec point;
  Mat V;    // n x m
  Mat XV;   // [X, V_i]
  Mat XXV;  // [X, [X, V_i]]
  Mat H0;
  Mat H1;
  double cond_D = 0.0;
  double residual = 0.0;  // relative part of XXV outside span[V | XV]
  double field_norm = 0.0;
};

/// Brackets and the least-squares H0/H1 without regularity enforcement.
PointFrameData frame_data(const DynamicPair& pair, const Vec& x);

/// As frame_data, but throws RegularityViolation when cond_D exceeds
/// kMaxFrameCondition or the residual exceeds kInvarianceTolerance.
PointFrameData extract_H(const DynamicPair& pair, const Vec& x);

enum class DerivativeMethod { Auto, Exact, FlowDifference };

/// X(H1) at x. Exact (AD through F) for SODE models; otherwise a central
/// difference of H1 between the time ±h flow images of x.
Mat lie_derivative_H1(const DynamicPair& pair, const Vec& x,
                      DerivativeMethod method = DerivativeMethod::Auto);

/// K = -H0 + X(H1)/2 - H1²/4.
Mat curvature_frame(const Mat& H0, const Mat& H1, const Mat& dX_H1);

/// Curvature in the working frame at x, by the exact path when available.
Mat curvature_at(const DynamicPair& pair, const Vec& x);

/// Closed-form SODE curvature with all partials of F by hyper-dual AD.
/// `point` is in the coordinates of pair.coords().
Mat sode_curvature(const DynamicPair& pair, const Vec& point);
Mat sode_curvature(const SodeModel& model, double t, const Vec& x, const Vec& y);

/// Canonical splitting D = V ⊕ H at a point.
struct Splitting {
  Mat horizontal;  // n x m, columns XV - V·H1/2
  Mat pi_V;        // n x n, projector onto V along H (valid on D)
  Mat pi_H;        // n x n, projector onto H along V
  Mat A;           // V -> H, in frame coordinates
  Mat B;           // H -> V, in frame coordinates
};

Splitting split_and_project(const DynamicPair& pair, const Vec& x);

/// Frame coordinates of D_X W = π_V [X, W] for a section W of V.
Vec covariant_derivative(const DynamicPair& pair, const VectorField& W, const Vec& x);

struct RegularityPoint {
  Vec point;
  double field_norm = 0.0;
  double cond_D = 0.0;
  double residual = 0.0;
  double residual_mod_X = 0.0;
  bool r1 = true;
  bool r2 = true;
  bool invariance = true;
  // Fails (I) strictly but passes once X itself is admitted.
  bool invariant_mod_X_only = false;
};

struct RegularityReport {
  std::vector<RegularityPoint> points;
  bool r1 = true;
  bool r2 = true;
  bool invariance = true;
  bool mod_X_only = false;
  double max_cond_D = 0.0;
  double max_residual = 0.0;
  double min_field_norm = 0.0;

  bool ok() const { return r1 && r2 && invariance; }
};

RegularityReport check_regularity(const DynamicPair& pair, const std::vector<Vec>& points);

}  // namespace conjscope
