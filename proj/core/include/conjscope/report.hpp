#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace conjscope {

// Plain data: everything an analysis produces, in a form that serialises
// losslessly. Matrices are row-major nested vectors.

using Matrix = std::vector<std::vector<double>>;

struct TrajectoryInfo {
  std::vector<double> x0;
  double T = 0.0;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  double rank_tol = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evals = 0;
  bool operator==(const TrajectoryInfo&) const = default;
};

struct RegularitySummary {
  bool ok = true;
  bool r1 = true;
  bool r2 = true;
  bool invariance = true;
  bool invariant_mod_X_only = false;
  std::size_t points = 0;
  double max_cond_D = 0.0;
  double max_residual = 0.0;
  double min_field_norm = 0.0;
  std::string failure;
  bool operator==(const RegularitySummary&) const = default;
};

struct ConjugateRecord {
  double t = 0.0;
  int multiplicity = 1;
  std::string mode;
  Matrix kernel;
  bool operator==(const ConjugateRecord&) const = default;
};

struct TrackRecord {
  std::vector<double> direction;
  double kappa = 0.0;
  double lambda_max = 0.0;
  std::optional<double> predicted;
  std::vector<double> sturm_zeros;
  bool operator==(const TrackRecord&) const = default;
};

struct BoundsRecord {
  std::string metric;  // "normal-frame" or "sigma"
  double lambda_max = 0.0;
  double trK_min = 0.0;
  double symmetry_residual = 0.0;
  double t_c = 0.0;
  std::optional<double> T_star;
  std::string thm2_reason;
  std::vector<TrackRecord> tracks;
  std::string thm1 = "not_applicable";
  std::string thm2 = "not_applicable";
  std::string thm3 = "not_applicable";
  std::vector<std::string> notes;
  bool operator==(const BoundsRecord&) const = default;
};

struct HamiltonianRecord {
  double lagrangian_residual = 0.0;
  double semi_invariance_residual = 0.0;
  Matrix metric;  // at x0, working frame
  bool metric_flipped = false;
  bool metric_definite = false;
  double metric_symmetry = 0.0;
  double selfadjoint_residual = 0.0;  // sup over samples, normal frame
  double horizontal_lagrangian = 0.0;
  double metric_drift = 0.0;          // sup ‖g_n(t) - g_n(0)‖ / ‖g_n(0)‖
  bool operator==(const HamiltonianRecord&) const = default;
};

struct Curves {
  std::vector<double> t;
  std::vector<double> sigma_min;
  Matrix eig_re;  // one row per sample, m entries
  Matrix eig_im;
  std::vector<double> trK;
  std::vector<double> detG;
  bool operator==(const Curves&) const = default;
};

struct AnalysisReport {
  std::string system;
  std::map<std::string, std::string> params;
  int m = 0;
  int n = 0;
  TrajectoryInfo trajectory;
  RegularitySummary regularity;
  std::vector<ConjugateRecord> conjugate_times;
  std::optional<std::vector<ConjugateRecord>> oracle_times;
  std::optional<double> min_sigma;
  BoundsRecord bounds;
  std::optional<BoundsRecord> sigma_bounds;
  std::optional<HamiltonianRecord> hamiltonian;
  std::vector<std::string> warnings;
  Curves curves;
  bool operator==(const AnalysisReport&) const = default;

  bool any_violated() const;
};

/// Canonical JSON (sorted keys, shortest round-trip doubles, non-finite
/// numbers as the strings "inf", "-inf", "nan").
std::string to_json_string(const AnalysisReport& report, int indent = 2);
AnalysisReport parse_report(const std::string& json);

/// t, sigma_min_P, k_eig_<i>_re, k_eig_<i>_im, tr_K, det_G with 17
/// significant digits.
std::string curves_csv(const Curves& curves);

}  // namespace conjscope
