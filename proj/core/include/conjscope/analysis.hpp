#pragma once

#include <functional>
#include <optional>
#include <string>

#include "conjscope/catalog.hpp"
#include "conjscope/hamiltonian.hpp"
#include "conjscope/jacobi.hpp"
#include "conjscope/linalg.hpp"
#include "conjscope/ode.hpp"
#include "conjscope/pair.hpp"
#include "conjscope/report.hpp"

namespace conjscope {

/// Everything needed to analyse one system, independent of where it came
/// from (catalog entry or config file).
struct SystemSpec {
  std::string name;
  ParamValues params;
  DynamicPairModel model;
  std::optional<SigmaExprs> sigma;
  std::function<void(const Vec&)> check_initial;
  Vec default_x0;
  double default_T = 0.0;
};

SystemSpec from_catalog(const BuiltSystem& built);

struct AnalysisOptions {
  IntegratorOptions integrator;
  double rank_tol = kDefaultRankTol;
  int samples_per_step = 8;
  Mat G0;  // empty: identity
  bool run_oracle = true;
};

/// Expands a SODE initial state (x, y) to a full point by prepending t = 0
/// for time-dependent systems. Points already of dimension n pass through.
Vec full_initial_point(const DynamicPair& pair, const Vec& x0);

/// Integrate, check regularity, transport a normal frame, solve the Jacobi
/// system, detect conjugate times and evaluate the bounds. A regularity
/// failure is reported (regularity.ok == false) rather than thrown.
AnalysisReport analyze(const SystemSpec& spec, const Vec& x0, double T,
                       const AnalysisOptions& options = {});

}  // namespace conjscope
