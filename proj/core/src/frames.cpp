#include "conjscope/frames.hpp"

#include <cmath>

#include "conjscope/errors.hpp"

namespace conjscope {

namespace {

Mat unpack(const Vec& state, int n, int m) {
  return Eigen::Map<const Mat>(state.data() + n, m, m);
}

}  // namespace

FrameTransport::FrameTransport(PairPtr pair, Trajectory joint, Mat G0)
    : pair_(std::move(pair)), joint_(std::move(joint)), G0_(std::move(G0)) {}

Vec FrameTransport::x(double t) const { return joint_.eval(t).head(pair_->n()); }

Mat FrameTransport::G(double t) const { return unpack(joint_.eval(t), pair_->n(), m()); }

Mat FrameTransport::G_dot(double t) const {
  return unpack(joint_.derivative(t), pair_->n(), m());
}

Mat FrameTransport::K_normal(double t) const {
  const Vec s = joint_.eval(t);
  const Mat g = unpack(s, pair_->n(), m());
  const Mat K = curvature_at(*pair_, s.head(pair_->n()));
  return g.partialPivLu().solve(K * g);
}

FrameTransport transport_normal_frame(PairPtr pair, const Vec& x0, double T, const Mat& G0_in,
                                      const IntegratorOptions& options) {
  const int n = pair->n();
  const int m = pair->m();
  if (x0.size() != n) throw PreconditionViolation("initial point has the wrong dimension");
  const Mat G0 = G0_in.size() == 0 ? Mat::Identity(m, m) : G0_in;
  if (G0.rows() != m || G0.cols() != m) throw PreconditionViolation("G0 must be m x m");
  const double det0 = G0.determinant();
  if (det0 == 0.0) throw SingularFrame("G0 is singular");

  Vec s0(n + m * m);
  s0.head(n) = x0;
  s0.tail(m * m) = Eigen::Map<const Vec>(G0.data(), m * m);

  const DynamicPair& p = *pair;
  const bool exact = p.sode().has_value();
  Rhs rhs = [&p, n, m, exact](double, const Vec& s, Vec& ds) {
    const Vec x = s.head(n);
    const Mat H1 = exact ? p.H1(x) : extract_H(p, x).H1;
    const Mat G = Eigen::Map<const Mat>(s.data() + n, m, m);
    ds.resize(s.size());
    ds.head(n) = p.field(x);
    const Mat Gd = -0.5 * H1 * G;
    ds.tail(m * m) = Eigen::Map<const Vec>(Gd.data(), m * m);
  };
  Trajectory joint = integrate(rhs, s0, 0.0, T, options);

  FrameTransport ft(std::move(pair), std::move(joint), G0);
  for (double t : ft.sample_times()) {
    if (!(std::abs(ft.det_G(t)) >= 1e-12 * std::abs(det0))) {
      throw SingularFrame("transported frame degenerated at t = " + std::to_string(t));
    }
  }
  return ft;
}

FrameTransport transport_normal_frame(PairPtr pair, const Trajectory& traj, const Mat& G0) {
  return transport_normal_frame(std::move(pair), traj.x0(), traj.t_end(), G0, traj.options());
}

Mat invariant_metric_at(const FrameTransport& ft, double t) {
  const Mat G = ft.G(t);
  return (G * G.transpose()).inverse();
}

double directional_curvature(const Mat& K, const Mat& g, const Vec& v) {
  const double gvv = v.dot(g * v);
  if (std::abs(gvv) <= 1e-14 * std::max(1.0, g.norm() * v.squaredNorm())) {
    throw ZeroDirection("direction has zero length in the metric");
  }
  return (K * v).dot(g * v) / gvv;
}

}  // namespace conjscope
