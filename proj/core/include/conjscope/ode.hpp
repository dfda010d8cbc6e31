#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "conjscope/linalg.hpp"

namespace conjscope {

struct IntegratorOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

/// Right-hand side dx/dt = f(t, x), written into dx.
using Rhs = std::function<void(double t, const Vec& x, Vec& dx)>;

/// Dense-output solution of an initial value problem produced by the
/// Dormand-Prince 5(4) pair. Each accepted step keeps the coefficients of
/// its fourth-order continuous extension.
class Trajectory {
 public:
  struct Segment {
    double t_left;
    double t_right;
    Vec y_left;
    Vec y_right;
    Vec r2, r3, r4, r5;
  };

  Trajectory() = default;

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const Vec& x0() const { return x0_; }
  int dim() const { return static_cast<int>(x0_.size()); }
  const std::vector<Segment>& segments() const { return segments_; }
  const StepStats& stats() const { return stats_; }
  const IntegratorOptions& options() const { return options_; }

  Vec eval(double t) const;
  Vec derivative(double t) const;
  Vec end_state() const;

  /// Every accepted step split into `per_step` equal pieces; includes both
  /// ends of the time span.
  std::vector<double> sample_times(int per_step = 8) const;

 private:
  friend Trajectory integrate(const Rhs&, const Vec&, double, double, const IntegratorOptions&);
  const Segment& locate(double t) const;

  double t_begin_ = 0.0;
  double t_end_ = 0.0;
  Vec x0_;
  std::vector<Segment> segments_;
  StepStats stats_;
  IntegratorOptions options_;
};

/// Integrates from t_begin to t_end (t_end > t_begin) with local error
/// controlled to (rel_tol, abs_tol). Deterministic for fixed inputs.
/// Throws StepSizeUnderflow or NonFiniteState.
Trajectory integrate(const Rhs& f, const Vec& x0, double t_begin, double t_end,
                     const IntegratorOptions& options = {});

/// Autonomous field on [0, T].
Trajectory integrate(const std::function<Vec(const Vec&)>& field, const Vec& x0, double T,
                     const IntegratorOptions& options = {});

enum class EventMode { SignChange, Touch };

struct Event {
  double t;
  EventMode mode;
};

const char* to_string(EventMode mode);

/// Zeros of a continuous scalar function sampled on an increasing grid. Sign
/// changes between samples are refined by bisection; sampled local minima of
/// |f| are refined by golden-section search and reported as touches when the
/// refined minimum is below zero_tol*scale,
/// with scale = max |f| over the grid. The left end of the grid is never
/// reported.
std::vector<Event> locate_events(const std::function<double(double)>& f,
                                 std::span<const double> grid, double zero_tol = 1e-9);

/// Same, on a uniform grid of `samples` intervals over [t0, t1].
std::vector<Event> locate_events(const std::function<double(double)>& f, double t0, double t1,
                                 double zero_tol = 1e-9, int samples = 1024);

/// Golden-section minimisation of f over [a, b]; returns the argmin.
double golden_section_minimum(const std::function<double(double)>& f, double a, double b);

}  // namespace conjscope
