#include "conjscope/ode.hpp"

#include <algorithm>
#include <cmath>

#include "conjscope/errors.hpp"

namespace conjscope {

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return err.size() == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(err.size()));
}

double scaled_norm(const Vec& v, const Vec& y, double rtol, double atol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = atol + rtol * std::abs(y[i]);
    acc += (v[i] / sc) * (v[i] / sc);
  }
  return v.size() == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

const char* to_string(EventMode mode) {
  return mode == EventMode::SignChange ? "sign_change" : "touch";
}

const Trajectory::Segment& Trajectory::locate(double t) const {
  if (segments_.empty()) throw PreconditionViolation("empty trajectory");
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end_ - t_begin_));
  if (t < t_begin_ - slack || t > t_end_ + slack) {
    throw PreconditionViolation("dense evaluation outside the integrated interval");
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.t_right; });
  if (it == segments_.end()) return segments_.back();
  return *it;
}

Vec Trajectory::eval(double t) const {
  const Segment& s = locate(t);
  if (t >= s.t_right) return s.y_right;
  if (t <= s.t_left) return s.y_left;
  const double h = s.t_right - s.t_left;
  const double th = (t - s.t_left) / h;
  const double th1 = 1.0 - th;
  return s.y_left + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

Vec Trajectory::derivative(double t) const {
  const Segment& s = locate(t);
  const double h = s.t_right - s.t_left;
  const double th = std::clamp((t - s.t_left) / h, 0.0, 1.0);
  const double th1 = 1.0 - th;
  return (s.r2 + (1.0 - 2.0 * th) * s.r3 + th * (2.0 - 3.0 * th) * s.r4 +
          2.0 * th * th1 * (th1 - th) * s.r5) /
         h;
}

Vec Trajectory::end_state() const { return segments_.empty() ? x0_ : segments_.back().y_right; }

std::vector<double> Trajectory::sample_times(int per_step) const {
  std::vector<double> out;
  out.reserve(segments_.size() * static_cast<std::size_t>(per_step) + 1);
  for (const auto& s : segments_) {
    const double h = s.t_right - s.t_left;
    for (int j = 0; j < per_step; ++j) out.push_back(s.t_left + h * j / per_step);
  }
  out.push_back(t_end_);
  return out;
}

Trajectory integrate(const Rhs& f, const Vec& x0, double t_begin, double t_end,
                     const IntegratorOptions& opt) {
  if (!(t_end > t_begin)) throw PreconditionViolation("integration span must be positive");
  if (!x0.allFinite()) throw NonFiniteState(t_begin);

  Trajectory traj;
  traj.t_begin_ = t_begin;
  traj.t_end_ = t_end;
  traj.x0_ = x0;
  traj.options_ = opt;
  StepStats& stats = traj.stats_;

  const Eigen::Index n = x0.size();
  const double rtol = opt.rel_tol;
  const double atol = opt.abs_tol;
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n), ytmp(n), ynew(n);

  double t = t_begin;
  y = x0;
  f(t, y, k1);
  ++stats.rhs_evals;
  if (!k1.allFinite()) throw NonFiniteState(t);

  const double span = t_end - t_begin;
  double h;
  {
    const double dnf = scaled_norm(k1, y, rtol, atol);
    const double dny = scaled_norm(y, y, rtol, atol);
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min({h0, span, opt.max_step});
    ytmp = y + h0 * k1;
    f(t + h0, ytmp, k2);
    ++stats.rhs_evals;
    const double der2 = k2.allFinite() ? scaled_norm(k2 - k1, y, rtol, atol) / h0 : 0.0;
    const double der12 = std::max(std::abs(der2), dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h0, h1, span, opt.max_step});
  }

  bool last_rejected = false;
  while (t < t_end) {
    if (stats.accepted + stats.rejected >= opt.max_steps) throw StepSizeUnderflow(t, h);
    const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < tiny) throw StepSizeUnderflow(t, h);
    bool final_step = false;
    if (t + h >= t_end || t_end - (t + h) < tiny) {
      h = t_end - t;
      final_step = true;
    }

    ytmp = y + h * a21 * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    const double t_new = final_step ? t_end : t + h;
    f(t_new, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t_new, ynew, k7);
    stats.rhs_evals += 6;

    const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = error_norm(err, y, ynew, rtol, atol);
    if (!std::isfinite(en) || !ynew.allFinite() || !k7.allFinite()) en = 1e10;

    if (en <= 1.0) {
      Trajectory::Segment seg;
      seg.t_left = t;
      seg.t_right = t_new;
      seg.y_left = y;
      seg.y_right = ynew;
      seg.r2 = ynew - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      traj.segments_.push_back(std::move(seg));
      ++stats.accepted;

      t = t_new;
      y = ynew;
      k1 = k7;
      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h = std::min(h * fac, opt.max_step);
      last_rejected = false;
    } else {
      ++stats.rejected;
      const double fac = std::max(0.2, 0.9 * std::pow(en, -0.2));
      h *= fac;
      last_rejected = true;
    }
  }
  return traj;
}

Trajectory integrate(const std::function<Vec(const Vec&)>& field, const Vec& x0, double T,
                     const IntegratorOptions& options) {
  return integrate([&field](double, const Vec& x, Vec& dx) { dx = field(x); }, x0, 0.0, T,
                   options);
}

double golden_section_minimum(const std::function<double(double)>& f, double a, double b) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200; ++it) {
    if (b - a <= 1e-14 * std::max(1.0, std::abs(a) + std::abs(b))) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

namespace {

double bisect_root(const std::function<double(double)>& f, double a, double b, double fa) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<Event> locate_events(const std::function<double(double)>& f,
                                 std::span<const double> grid, double zero_tol) {
  std::vector<Event> events;
  const std::size_t n = grid.size();
  if (n < 2) return events;
  std::vector<double> v(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = f(grid[i]);
    scale = std::max(scale, std::abs(v[i]));
  }
  if (scale == 0.0) return events;

  const double touch_tol = zero_tol * scale;
  auto sign_change = [&](std::size_t i) { return (v[i] < 0.0 && v[i + 1] > 0.0) || (v[i] > 0.0 && v[i + 1] < 0.0); };

  for (std::size_t i = 1; i < n; ++i) {
    // Bracketed sign change on (grid[i-1], grid[i]).
    if (sign_change(i - 1)) {
      events.push_back({bisect_root(f, grid[i - 1], grid[i], v[i - 1]), EventMode::SignChange});
      continue;
    }
    if (v[i] == 0.0) {
      const bool crossing = i + 1 < n && ((v[i - 1] < 0.0) != (v[i + 1] < 0.0)) && v[i + 1] != 0.0;
      events.push_back({grid[i], crossing ? EventMode::SignChange : EventMode::Touch});
      continue;
    }
    // Sampled local minimum of |f| with no adjacent sign change.
    const double here = std::abs(v[i]);
    const bool left_ok = here <= std::abs(v[i - 1]);
    const bool right_ok = (i + 1 == n) || (here <= std::abs(v[i + 1]) && !sign_change(i));
    if (!(left_ok && right_ok)) continue;
    const double lo = grid[i - 1];
    const double hi = (i + 1 < n) ? grid[i + 1] : grid[i];
    auto absf = [&f](double t) { return std::abs(f(t)); };
    const double t_min = golden_section_minimum(absf, lo, hi);
    const double f_min = absf(t_min);
    if (f_min < touch_tol) events.push_back({t_min, EventMode::Touch});
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  std::vector<Event> unique;
  const double merge = 1e-12 * std::max(1.0, std::abs(grid.back()));
  for (const auto& e : events) {
    if (e.t <= grid.front()) continue;
    if (!unique.empty() && std::abs(e.t - unique.back().t) <= merge) continue;
    unique.push_back(e);
  }
  return unique;
}

std::vector<Event> locate_events(const std::function<double(double)>& f, double t0, double t1,
                                 double zero_tol, int samples) {
  std::vector<double> grid(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) grid[static_cast<std::size_t>(i)] = t0 + (t1 - t0) * i / samples;
  return locate_events(f, grid, zero_tol);
}

}  // namespace conjscope
