#pragma once

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conjscope/hamiltonian.hpp"
#include "conjscope/linalg.hpp"
#include "conjscope/pair.hpp"

namespace conjscope {

/// Parameter values as given by the user. Numeric parameters are parsed on
/// use; some entries take expression-valued parameters.
using ParamValues = std::map<std::string, std::string, std::less<>>;

/// Maps ω, ε, γ to omega, eps, gamma; other names pass through.
std::string canonical_param_name(std::string_view name);

struct CatalogParam {
  std::string name;
  std::string default_value;
  std::string description;
  bool expression = false;
};

/// A machine-checkable expectation about an entry. `source` is one of
/// "closed-form", "published-example", "numerical-oracle".
struct KnownFact {
  std::string id;
  std::string description;
  std::string source;
  double tolerance = 0.0;
  ParamValues params;                // overrides for the fact
  std::vector<double> x0;            // empty: entry default
  double T = 0.0;                    // 0: entry default
  std::vector<double> conjugate_times;
  std::vector<int> multiplicities;   // parallel to conjugate_times
  std::optional<std::vector<double>> curvature;  // row-major, at x0
};

struct BuiltSystem {
  std::string name;
  ParamValues params;  // complete, after defaults
  DynamicPairModel model;
  std::optional<SigmaExprs> sigma;
  Vec default_x0;
  double default_T = 0.0;
  /// Throws PreconditionViolation when x0 is outside the admissible set.
  std::function<void(const Vec&)> check_initial;
};

struct CatalogEntry {
  std::string name;
  std::string description;
  std::vector<CatalogParam> params;
  std::vector<double> default_x0;
  double default_T = 0.0;
  std::vector<KnownFact> facts;
  std::function<BuiltSystem(const ParamValues&)> factory;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(std::string_view name);

/// Builds an entry, filling defaults. Throws UnknownEntry for a bad name,
/// ConfigError for a parameter the entry does not define
/// and MissingParam when a required value is empty.
BuiltSystem build(std::string_view name, const ParamValues& params = {});

/// Closed-form facts about x'' = -x - εy, y'' = -y + εx. With z = x + iy
/// the system reads z'' = -(1 - iε)z, so with ω = sqrt(1 - iε) the Jacobi
/// matrix acts as multiplication by sin(ωt)/ω and σ_min(P) = |sin(ωt)/ω|.
struct PerturbedPairOracle {
  double eps = 0.0;
  double T = 0.0;
  std::complex<double> omega;
  std::vector<double> conjugate_times;      // kπ ≤ T for ε = 0, none otherwise
  std::optional<double> min_sigma;          // windowed minimum of |sin(ωt)/ω|

  std::complex<double> z(double t) const;   // sin(ωt)/ω
  double sigma(double t) const { return std::abs(z(t)); }
  /// Phase-space state at t from x0 = (x, y, x', y').
  Vec state(const Vec& x0, double t) const;
};

PerturbedPairOracle perturbed_pair_oracle(double eps, double T);

double f0(double t);                   // sin t
double f1(double t);                   // (t cos t - sin t) / 2
double f1_series(double t, int terms = 60);

/// Curvature closed forms used by the catalog facts and acceptance checks.
struct DancingCurvature {
  double chi1 = 0.0;
  double chi2 = 0.0;
  double k21_printed = 0.0;    // -y2(χ1+χ2)/(y1-x2), as published
  double k21 = 0.0;            // y2(χ1-χ2)/(y1-x2), from the SODE formula
};

/// Evaluates χ1, χ2 and both off-diagonal forms for the dancing system with
/// the given F at the point (t, x1, x2, y1, y2).
DancingCurvature dancing_curvature(const std::string& F, double t, const Vec& x, const Vec& y);

/// Mechanical fixture: published and SODE-derived curvature at q.
struct MechanicalCurvature {
  Mat published;  // g⁻¹(-Hess P + ∂F0ᵀ)
  Mat derived;    // -F_q = g⁻¹(Hess P - ∂F0)
};

MechanicalCurvature mechanical_curvature(const ParamValues& params, const Vec& q);

}  // namespace conjscope
