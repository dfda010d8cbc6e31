#pragma once

#include <vector>

#include "conjscope/linalg.hpp"
#include "conjscope/ode.hpp"
#include "conjscope/pair.hpp"

namespace conjscope {

/// A normal frame W = V·G along an integral curve of X, where
/// G' = -H1(c(t))·G/2. The curve and G are integrated as one system so
/// both share the same step sequence and error control.
class FrameTransport {
 public:
  FrameTransport(PairPtr pair, Trajectory joint, Mat G0);

  const DynamicPair& pair() const { return *pair_; }
  const PairPtr& pair_ptr() const { return pair_; }
  const Trajectory& joint() const { return joint_; }
  const Mat& G0() const { return G0_; }
  int m() const { return static_cast<int>(G0_.rows()); }
  double t_end() const { return joint_.t_end(); }

  Vec x(double t) const;
  Mat G(double t) const;
  Mat G_dot(double t) const;
  double det_G(double t) const { return G(t).determinant(); }

  Mat H1(double t) const { return pair_->H1(x(t)); }
  Mat K_frame(double t) const { return curvature_at(*pair_, x(t)); }
  /// G⁻¹·K_frame·G.
  Mat K_normal(double t) const;

  std::vector<double> sample_times(int per_step = 8) const { return joint_.sample_times(per_step); }

 private:
  PairPtr pair_;
  Trajectory joint_;
  Mat G0_;
};

/// Integrates the curve from x0 together with G from G0 (identity when
/// empty). Throws SingularFrame if |det G| drops below 1e-12·|det G0| at
/// any dense sample, and RegularityViolation from the bracket solve.
FrameTransport transport_normal_frame(PairPtr pair, const Vec& x0, double T, const Mat& G0 = {},
                                      const IntegratorOptions& options = {});

/// Same, re-using the start point, span and tolerances of a trajectory.
FrameTransport transport_normal_frame(PairPtr pair, const Trajectory& traj, const Mat& G0 = {});

/// (G·Gᵀ)⁻¹: the metric on V in working-frame coordinates that makes the
/// transported frame orthonormal.
Mat invariant_metric_at(const FrameTransport& ft, double t);

/// g(Kv, v) / g(v, v). Throws ZeroDirection when g(v, v) vanishes.
double directional_curvature(const Mat& K, const Mat& g, const Vec& v);

}  // namespace conjscope
