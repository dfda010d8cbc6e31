#include "conjscope/pair.hpp"

#include <cmath>
#include <span>

#include <Eigen/SVD>

#include "conjscope/errors.hpp"
#include "conjscope/ode.hpp"

namespace conjscope {

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr const_node(double v) { return Expr::constant(v).root_ptr(); }

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// c * e, folding the trivial cases so changed frames stay readable.
NodePtr scaled(const NodePtr& e, double c) {
  if (c == 0.0 || is_const(e, 0.0)) return const_node(0.0);
  if (c == 1.0) return e;
  if (e->op == Op::Const) return const_node(c * e->value);
  return make_node(Op::Mul, {const_node(c), e});
}

NodePtr sum(const NodePtr& a, const NodePtr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return make_node(Op::Add, {a, b});
}

std::vector<HyperDual> seed(const Vec& x, const Vec& a, const Vec& b) {
  std::vector<HyperDual> s(static_cast<std::size_t>(x.size()));
  for (Eigen::Index k = 0; k < x.size(); ++k) s[static_cast<std::size_t>(k)] = HyperDual(x[k], a[k], b[k], 0.0);
  return s;
}

struct SodePartials {
  Mat Fx, Fy, XFy;  // XFy = X(F_y), exact
};

SodePartials sode_partials(const DynamicPair& pair, const Vec& point) {
  const SodeModel& s = *pair.sode();
  const int m = s.m;
  const int n = pair.n();
  const auto& F = pair.sode_programs();
  SodePartials out{Mat(m, m), Mat(m, m), Mat(m, m)};
  const Vec Xv = pair.field(point);
  const Vec zero = Vec::Zero(n);
  for (int j = 0; j < m; ++j) {
    Vec ex = Vec::Zero(n);
    ex[pair.x_index(j)] = 1.0;
    Vec ey = Vec::Zero(n);
    ey[pair.y_index(j)] = 1.0;
    const auto sx = seed(point, ex, zero);
    const auto sy = seed(point, Xv, ey);
    for (int i = 0; i < m; ++i) {
      const auto& prog = F[static_cast<std::size_t>(i)];
      out.Fx(i, j) = prog.eval(std::span<const HyperDual>(sx)).e1;
      const HyperDual r = prog.eval(std::span<const HyperDual>(sy));
      out.Fy(i, j) = r.e2;
      out.XFy(i, j) = r.e12;
    }
  }
  return out;
}

double relative_residual(const Mat& basis, const Mat& target) {
  const double norm = target.norm();
  if (norm == 0.0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Mat coeffs = svd.solve(target);
  return (basis * coeffs - target).norm() / norm;
}

Mat splitting_basis(const PointFrameData& d) {
  const int m = static_cast<int>(d.V.cols());
  Mat Bm(d.V.rows(), 2 * m);
  Bm << d.V, d.XV - 0.5 * d.V * d.H1;
  return Bm;
}

}  // namespace

std::vector<std::string> SodeModel::coords() const {
  std::vector<std::string> c;
  if (!autonomous) c.emplace_back("t");
  for (int i = 1; i <= m; ++i) c.push_back("x" + std::to_string(i));
  for (int i = 1; i <= m; ++i) c.push_back("y" + std::to_string(i));
  return c;
}

SodeModel make_sode(std::vector<Expr> F, ParamMap params, std::optional<bool> autonomous) {
  if (F.empty()) throw PreconditionViolation("a second-order system needs at least one equation");
  bool uses_t = false;
  for (const auto& f : F) uses_t = uses_t || f.depends_on("t");
  if (autonomous.value_or(!uses_t) && uses_t) {
    throw PreconditionViolation("autonomous system must not depend on t");
  }
  SodeModel s;
  s.m = static_cast<int>(F.size());
  s.F = std::move(F);
  s.autonomous = autonomous.value_or(!uses_t);
  s.params = std::move(params);
  return s;
}

SodeModel make_sode(const std::vector<std::string>& F, ParamMap params,
                    std::optional<bool> autonomous) {
  std::vector<Expr> parsed;
  parsed.reserve(F.size());
  for (const auto& f : F) parsed.push_back(Expr::parse(f));
  return make_sode(std::move(parsed), std::move(params), autonomous);
}

GenericModel lift_sode(const SodeModel& model) {
  GenericModel g;
  g.coords = model.coords();
  g.params = model.params;
  const int m = model.m;
  if (!model.autonomous) g.X.push_back(Expr::constant(1.0));
  for (int i = 1; i <= m; ++i) g.X.push_back(Expr::variable("y" + std::to_string(i)));
  for (const auto& f : model.F) g.X.push_back(f);
  const int n = static_cast<int>(g.coords.size());
  const int y0 = n - m;
  for (int j = 0; j < m; ++j) {
    std::vector<Expr> col(static_cast<std::size_t>(n), Expr::constant(0.0));
    col[static_cast<std::size_t>(y0 + j)] = Expr::constant(1.0);
    g.V.push_back(std::move(col));
  }
  return g;
}

GenericModel change_frame(const GenericModel& model, const Mat& G) {
  const auto m = model.V.size();
  if (G.rows() != static_cast<Eigen::Index>(m) || G.cols() != static_cast<Eigen::Index>(m)) {
    throw PreconditionViolation("frame change must be m x m");
  }
  if (std::abs(G.determinant()) == 0.0) throw SingularFrame("frame change matrix is singular");
  GenericModel out = model;
  const auto n = model.coords.size();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      NodePtr acc = const_node(0.0);
      for (std::size_t k = 0; k < m; ++k) {
        acc = sum(acc, scaled(model.V[k][c].root_ptr(), G(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))));
      }
      out.V[j][c] = Expr(acc);
    }
  }
  return out;
}

DynamicPair::DynamicPair(const DynamicPairModel& model) {
  if (const auto* s = std::get_if<SodeModel>(&model)) {
    sode_ = *s;
    generic_ = lift_sode(*s);
    t_index_ = s->autonomous ? -1 : 0;
    x_offset_ = s->autonomous ? 0 : 1;
  } else {
    generic_ = std::get<GenericModel>(model);
  }
  const auto n = generic_.coords.size();
  if (generic_.X.size() != n) throw PreconditionViolation("X needs one component per coordinate");
  if (generic_.V.empty()) throw PreconditionViolation("the distribution needs at least one frame vector");
  X_ = VectorField(generic_.X, generic_.coords, generic_.params);
  for (const auto& col : generic_.V) V_.emplace_back(col, generic_.coords, generic_.params);
  if (sode_) {
    for (const auto& f : sode_->F) F_.emplace_back(f, generic_.coords, generic_.params);
  }
}

Mat DynamicPair::frame(const Vec& x) const {
  Mat V(n(), m());
  for (int j = 0; j < m(); ++j) V.col(j) = V_[static_cast<std::size_t>(j)].value(x);
  return V;
}

Mat DynamicPair::H1(const Vec& x) const {
  if (sode_) {
    const int mm = sode_->m;
    Mat H(mm, mm);
    const Vec zero = Vec::Zero(n());
    for (int j = 0; j < mm; ++j) {
      Vec ey = Vec::Zero(n());
      ey[y_index(j)] = 1.0;
      const auto s = seed(x, ey, zero);
      for (int i = 0; i < mm; ++i) H(i, j) = -F_[static_cast<std::size_t>(i)].eval(std::span<const HyperDual>(s)).e1;
    }
    return H;
  }
  return frame_data(*this, x).H1;
}

PointFrameData frame_data(const DynamicPair& pair, const Vec& x) {
  const int n = pair.n();
  const int m = pair.m();
  PointFrameData d;
  d.point = x;
  d.V = pair.frame(x);
  d.XV.resize(n, m);
  d.XXV.resize(n, m);

  const VectorField& X = pair.X();
  const Vec Xv = X.value(x);
  d.field_norm = Xv.norm();
  const Mat JX = X.jacobian(x);
  const Vec DXX = JX * Xv;
  const Vec zero = Vec::Zero(n);

  for (int i = 0; i < m; ++i) {
    const VectorField& Vi = pair.V(i);
    const Vec v = d.V.col(i);
    // [X,[X,V]] = D([X,V])·X - DX·[X,V], with
    // D([X,V])·X = D²V[X,X] + DV·DX·X - D²X[V,X] - DX·DV·X.
    const DirectionalJet jv = Vi.jet(x, Xv, Xv);
    const DirectionalJet jx = X.jet(x, v, Xv);
    const Vec DVX = jv.d_a;
    const Vec xv = DVX - JX * v;
    const Vec DV_DXX = Vi.is_constant() ? zero : Vi.jet(x, DXX, zero).d_a;
    const Vec dxv_x = jv.d_ab + DV_DXX - jx.d_ab - JX * DVX;
    d.XV.col(i) = xv;
    d.XXV.col(i) = dxv_x - JX * xv;
  }

  Mat D(n, 2 * m);
  D << d.V, d.XV;
  Eigen::JacobiSVD<Mat> svd(D, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() > 0 ? s[0] : 0.0;
  const double smin = s.size() > 0 ? s[s.size() - 1] : 0.0;
  d.cond_D = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  const Mat coeffs = svd.solve(d.XXV);
  d.H0 = coeffs.topRows(m);
  d.H1 = coeffs.bottomRows(m);
  const double nx = d.XXV.norm();
  d.residual = nx == 0.0 ? 0.0 : (D * coeffs - d.XXV).norm() / nx;
  if (!std::isfinite(d.cond_D)) d.residual = std::max(d.residual, 1.0);
  return d;
}

PointFrameData extract_H(const DynamicPair& pair, const Vec& x) {
  PointFrameData d = frame_data(pair, x);
  if (d.field_norm <= kMinFieldNorm) {
    throw RegularityViolation("R1", "X vanishes at the evaluation point");
  }
  if (!(d.cond_D <= kMaxFrameCondition)) {
    throw RegularityViolation("R2", "condition number of [V | XV] is " + std::to_string(d.cond_D));
  }
  if (d.residual > kInvarianceTolerance) {
    throw RegularityViolation("I", "[X,[X,V]] leaves span[V | XV], relative residual " +
                                       std::to_string(d.residual));
  }
  return d;
}

Mat lie_derivative_H1(const DynamicPair& pair, const Vec& x, DerivativeMethod method) {
  if (method == DerivativeMethod::Exact && !pair.sode()) {
    throw PreconditionViolation("exact X(H1) is only available for second-order systems");
  }
  if (pair.sode() && method != DerivativeMethod::FlowDifference) {
    return -sode_partials(pair, x).XFy;
  }
  const double h = 1e-4 * (1.0 + x.norm());
  IntegratorOptions tight;
  tight.rel_tol = 1e-13;
  tight.abs_tol = 1e-15;
  const auto fwd = [&pair](const Vec& p) { return pair.field(p); };
  const auto bwd = [&pair](const Vec& p) { return Vec(-pair.field(p)); };
  const Vec xp = integrate(fwd, x, h, tight).end_state();
  const Vec xm = integrate(bwd, x, h, tight).end_state();
  return (extract_H(pair, xp).H1 - extract_H(pair, xm).H1) / (2.0 * h);
}

Mat curvature_frame(const Mat& H0, const Mat& H1, const Mat& dX_H1) {
  return -H0 + 0.5 * dX_H1 - 0.25 * H1 * H1;
}

Mat curvature_at(const DynamicPair& pair, const Vec& x) {
  if (pair.sode()) return sode_curvature(pair, x);
  const PointFrameData d = extract_H(pair, x);
  return curvature_frame(d.H0, d.H1, lie_derivative_H1(pair, x));
}

Mat sode_curvature(const DynamicPair& pair, const Vec& point) {
  if (!pair.sode()) throw PreconditionViolation("closed-form curvature needs a second-order system");
  const SodePartials p = sode_partials(pair, point);
  return -p.Fx - 0.25 * p.Fy * p.Fy + 0.5 * p.XFy;
}

Mat sode_curvature(const SodeModel& model, double t, const Vec& x, const Vec& y) {
  const DynamicPair pair(model);
  const int m = model.m;
  Vec point(pair.n());
  int k = 0;
  if (!model.autonomous) point[k++] = t;
  point.segment(k, m) = x;
  point.segment(k + m, m) = y;
  return sode_curvature(pair, point);
}

Splitting split_and_project(const DynamicPair& pair, const Vec& x) {
  const PointFrameData d = extract_H(pair, x);
  const int n = pair.n();
  const int m = pair.m();
  const Mat dH1 = lie_derivative_H1(pair, x);
  const Mat Bm = splitting_basis(d);
  const Mat pinv = Bm.completeOrthogonalDecomposition().pseudoInverse();

  Splitting s;
  s.horizontal = Bm.rightCols(m);
  Mat Vpad = Mat::Zero(n, 2 * m);
  Vpad.leftCols(m) = d.V;
  Mat Hpad = Mat::Zero(n, 2 * m);
  Hpad.rightCols(m) = s.horizontal;
  s.pi_V = Vpad * pinv;
  s.pi_H = Hpad * pinv;

  s.A = (pinv * d.XV).bottomRows(m);
  const Mat XH = d.XXV - 0.5 * d.XV * d.H1 - 0.5 * d.V * dH1;
  s.B = (pinv * XH).topRows(m);
  return s;
}

Vec covariant_derivative(const DynamicPair& pair, const VectorField& W, const Vec& x) {
  const PointFrameData d = extract_H(pair, x);
  const Mat pinv = splitting_basis(d).completeOrthogonalDecomposition().pseudoInverse();
  const Vec xw = bracket(pair.X(), W, x);
  return (pinv * xw).head(pair.m());
}

RegularityReport check_regularity(const DynamicPair& pair, const std::vector<Vec>& points) {
  RegularityReport rep;
  rep.min_field_norm = std::numeric_limits<double>::infinity();
  for (const auto& x : points) {
    RegularityPoint p;
    p.point = x;
    const PointFrameData d = frame_data(pair, x);
    p.field_norm = d.field_norm;
    p.cond_D = d.cond_D;
    p.residual = d.residual;
    p.r1 = d.field_norm > kMinFieldNorm;
    p.r2 = d.cond_D <= kMaxFrameCondition;
    p.invariance = d.residual <= kInvarianceTolerance;
    if (!p.invariance) {
      Mat DX(pair.n(), 2 * pair.m() + 1);
      DX << d.V, d.XV, pair.field(x);
      p.residual_mod_X = relative_residual(DX, d.XXV);
      p.invariant_mod_X_only = p.residual_mod_X <= kInvarianceTolerance;
    } else {
      p.residual_mod_X = p.residual;
    }
    rep.r1 = rep.r1 && p.r1;
    rep.r2 = rep.r2 && p.r2;
    rep.invariance = rep.invariance && p.invariance;
    rep.mod_X_only = rep.mod_X_only || p.invariant_mod_X_only;
    rep.max_cond_D = std::max(rep.max_cond_D, p.cond_D);
    rep.max_residual = std::max(rep.max_residual, p.residual);
    rep.min_field_norm = std::min(rep.min_field_norm, p.field_norm);
    rep.points.push_back(std::move(p));
  }
  if (points.empty()) rep.min_field_norm = 0.0;
  return rep;
}

}  // namespace conjscope
