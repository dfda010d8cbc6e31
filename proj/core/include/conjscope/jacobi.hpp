#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "conjscope/linalg.hpp"
#include "conjscope/ode.hpp"
#include "conjscope/pair.hpp"

namespace conjscope {

using MatrixFunction = std::function<Mat(double)>;

inline constexpr double kDefaultRankTol = 1e-7;
inline constexpr double kMergeTolerance = 1e-6;

/// Solution of P' = Q, Q' = -K·P with P(0) = 0, Q(0) = I.
class JacobiSolution {
 public:
  JacobiSolution(MatrixFunction K, int m, Trajectory traj);

  int m() const { return m_; }
  double t_end() const { return traj_.t_end(); }
  const Trajectory& trajectory() const { return traj_; }
  const MatrixFunction& K() const { return K_; }

  Mat P(double t) const;
  Mat Q(double t) const;
  double sigma_min(double t) const;

  std::vector<double> sample_times(int per_step = 8) const { return traj_.sample_times(per_step); }

 private:
  MatrixFunction K_;
  int m_;
  Trajectory traj_;
};

JacobiSolution integrate_jacobi(MatrixFunction K, int m, double T,
                                const IntegratorOptions& options = {});

struct ConjugateTime {
  double t_star = 0.0;
  int multiplicity = 1;
  std::vector<Vec> kernel_basis;
  EventMode mode = EventMode::SignChange;
};

/// Rank drops of a square matrix function on (0, T]. Candidates are the
/// events of sgn(det M)·σ_min(M) on the grid; multiplicity counts singular
/// values of M(t*) below rank_tol times the largest σ_max seen on [0, t*].
/// Times closer than kMergeTolerance are merged.
std::vector<ConjugateTime> detect_rank_drops(const MatrixFunction& M,
                                             const std::vector<double>& grid,
                                             double rank_tol = kDefaultRankTol);

std::vector<ConjugateTime> find_conjugate_times(const JacobiSolution& js,
                                                double rank_tol = kDefaultRankTol);

/// Smallest value of f over the interior local minima on the grid (refined
/// by golden-section search) and the right end when f is still decreasing
/// there. Empty when f only increases. The monotone rise away from t = 0 is
/// deliberately not counted.
std::optional<double> windowed_minimum(const std::function<double(double)>& f,
                                       const std::vector<double>& grid);

/// ∫ (|w'|² - <K w, w>) dt over [0, r] for w sampled uniformly (odd sample
/// count, first sample at 0, last at r). Simpson quadrature; w' from a
/// cubic B-spline through the samples.
double index_functional(const MatrixFunction& K, const std::vector<Vec>& w, double r);

/// Conjugate times straight from the definition: integrate the flow
/// linearization Φ along the curve and measure how far Φ(t)·V(x0) leaves
/// V(c(t)) by solving [V | XV (| X)]·coeffs = Φ(t)·V_j(x0). The XV block
/// is rank-tested like P.
struct OracleResult {
  std::vector<ConjugateTime> times;
  Trajectory flow;
};

OracleResult variational_oracle(const DynamicPair& pair, const Vec& x0, double T,
                                const IntegratorOptions& options = {},
                                double rank_tol = kDefaultRankTol);

}  // namespace conjscope
