#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conjscope/analysis.hpp"
#include "conjscope/catalog.hpp"

namespace conjscope {

/// The [system], [params] and [sigma] sections of a config file.
///
///   [system]
///   type = catalog | sode | generic
///   name = harmonic            ; catalog entry, or a label
///   m = 2                      ; sode and generic
///   F1 = -x1 - eps*x2          ; sode, one per component
///   autonomous = true          ; sode, optional
///   coords = x,y,z             ; generic
///   X1 = ...                   ; generic, one per coordinate
///   V1_2 = ...                 ; generic, component 2 of frame field V1
///
///   [params]                   ; numeric for sode/generic, strings for catalog
///   [sigma]
///   sigma1_3 = 1               ; σ(∂1, ∂3); the transposed entry is implied
struct SystemConfig {
  std::string type = "catalog";
  std::string name;
  ParamValues params;
  int m = 0;
  std::vector<std::string> F;
  std::optional<bool> autonomous;
  std::vector<std::string> coords;
  std::vector<std::string> X;
  std::vector<std::vector<std::string>> V;  // V[j][i]
  std::map<std::pair<int, int>, std::string> sigma;  // 0-based
};

/// A whole config file: the system plus the optional [run] section
/// (x0, T, rel_tol, abs_tol, rank_tol).
struct RunConfig {
  SystemConfig system;
  std::optional<std::vector<double>> x0;
  std::optional<double> T;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> rank_tol;
};

/// Throws ConfigError with the offending key on any problem.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the system, with `overrides` taking precedence over [params].
SystemSpec build_system(const SystemConfig& config, const ParamValues& overrides = {});

/// A single number given as a constant expression ("pi/2", "sin(0.8)").
double parse_number(std::string_view text);
/// Comma-separated list of constant expressions.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace conjscope
