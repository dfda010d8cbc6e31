#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "conjscope/jacobi.hpp"
#include "conjscope/linalg.hpp"
#include "conjscope/ode.hpp"

namespace conjscope {

enum class Verdict { Consistent, Violated, NotApplicable };

const char* to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

// Slack absorbing integrator error in every comparison against a bound.
inline constexpr double kBoundSlack = 1e-6;
inline constexpr double kSymmetryTolerance = 1e-6;
inline constexpr double kEigenlineTolerance = 1e-6;

/// K expressed in g-orthonormal coordinates: Lᵀ·K·L⁻ᵀ with g = L·Lᵀ.
Mat g_orthonormal(const Mat& K, const Mat& g);

/// ‖gK - (gK)ᵀ‖ / ‖gK‖, zero for gK = 0.
double symmetry_residual(const Mat& K, const Mat& g);

struct Theorem1Result {
  double lambda = 0.0;  // sup of the largest eigenvalue of the symmetric part
  double t_c = 0.0;     // no conjugate time in (0, t_c)
};

Theorem1Result theorem1_interval(const std::vector<Mat>& K, const std::vector<Mat>& g, double T);

struct Theorem2Result {
  std::optional<double> T_star;
  double kappa = 0.0;  // inf tr K
  double symmetry_residual = 0.0;
  std::string reason;  // why T_star is absent
};

/// T* = π·sqrt(m/κ) when K is g-symmetric, κ = inf tr K > 0 and T* < T.
Theorem2Result theorem2_bound(const std::vector<Mat>& K, const std::vector<Mat>& g, int m, double T);

struct Eigenline {
  Vec direction;               // unit vector in normal-frame coordinates
  std::vector<double> lambda;  // eᵀK(t)e at each sample
};

/// Constant eigenvectors of K(t). Candidates come from the real spectrum of
/// K at the first sample; a candidate e is kept when
/// ‖K e - (eᵀK e) e‖ ≤ 1e-6·‖K‖ at every sample.
std::vector<Eigenline> detect_parallel_eigenlines(const std::vector<Mat>& K);

/// Zeros on (0, T] of y'' = -λ(t)·y, y(0) = 0, y'(0) = 1.
std::vector<double> sturm_zeros(const std::function<double(double)>& lambda, double T,
                                const IntegratorOptions& options = {});

/// Same with λ given by samples, interpolated by a monotone cubic.
std::vector<double> sturm_zeros(const std::vector<double>& t, const std::vector<double>& lambda,
                                double T, const IntegratorOptions& options = {});

struct EigenlineTrack {
  Vec direction;
  double kappa = 0.0;       // inf of the eigenvalue track
  double lambda_max = 0.0;  // sup of the eigenvalue track
  std::optional<double> predicted;  // π/sqrt(κ) when κ > 0
  std::vector<double> sturm_zeros;
};

struct BoundsReport {
  double lambda_max = 0.0;
  double trK_min = 0.0;
  double symmetry_residual = 0.0;
  double t_c = 0.0;
  std::optional<double> T_star;
  std::string thm2_reason;
  std::vector<EigenlineTrack> tracks;
  Verdict thm1 = Verdict::NotApplicable;
  Verdict thm2 = Verdict::NotApplicable;
  Verdict thm3 = Verdict::NotApplicable;
  std::vector<std::string> notes;

  bool any_violated() const {
    return thm1 == Verdict::Violated || thm2 == Verdict::Violated || thm3 == Verdict::Violated;
  }
};

/// Runs all three estimates on K(t) sampled at `times` (with metric g(t),
/// both in normal-frame coordinates) and compares them with the detected
/// conjugate times.
BoundsReport evaluate_bounds(const MatrixFunction& K, const MatrixFunction& g,
                             const std::vector<double>& times, double T,
                             const std::vector<ConjugateTime>& detected,
                             const IntegratorOptions& options = {});

}  // namespace conjscope
