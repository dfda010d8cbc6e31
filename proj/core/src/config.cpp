#include "conjscope/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "conjscope/errors.hpp"
#include "conjscope/expr.hpp"

namespace conjscope {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? s.npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

double number_for(const std::string& key, const std::string& text) {
  try {
    return parse_number(text);
  } catch (const Error& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

int positive_int(const std::string& key, const std::string& text) {
  const double v = number_for(key, text);
  if (!(v >= 1.0) || v != std::floor(v) || v > 64.0) {
    throw ConfigError("'" + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

Expr expr_for(const std::string& key, const std::string& text) {
  try {
    return Expr::parse(text);
  } catch (const Error& e) {
    throw ConfigError("bad expression for '" + key + "': " + e.what());
  }
}

bool boolean(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "' must be true or false");
}

}  // namespace

double parse_number(std::string_view text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  double v = 0.0;
  try {
    const ExprProgram prog(Expr::parse(s), {}, ParamMap{{"pi", std::numbers::pi}});
    v = prog.eval(std::span<const double>{});
  } catch (const Error& e) {
    throw ConfigError("'" + s + "' is not a constant: " + e.what());
  }
  if (!std::isfinite(v)) throw ConfigError("'" + s + "' is not a finite number");
  return v;
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item));
  return out;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig cfg;
  auto& sys = cfg.system;
  static const std::regex f_key(R"(F([0-9]+))");
  static const std::regex x_key(R"(X([0-9]+))");
  static const std::regex v_key(R"(V([0-9]+)_([0-9]+))");
  static const std::regex sigma_key(R"(sigma([0-9]+)_([0-9]+))");

  std::map<int, std::string> F, X;
  std::map<std::pair<int, int>, std::string> V;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError("key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string value = trim(node.data());
      const std::string where = section + "." + key;
      std::smatch mt;
      if (section == "system") {
        if (key == "type") {
          if (value != "catalog" && value != "sode" && value != "generic") {
            throw ConfigError("system.type must be catalog, sode or generic");
          }
          sys.type = value;
        } else if (key == "name") {
          sys.name = value;
        } else if (key == "m") {
          sys.m = positive_int(where, value);
        } else if (key == "autonomous") {
          sys.autonomous = boolean(where, value);
        } else if (key == "coords") {
          sys.coords = split(value, ',');
        } else if (std::regex_match(key, mt, f_key)) {
          F[std::stoi(mt[1])] = value;
        } else if (std::regex_match(key, mt, x_key)) {
          X[std::stoi(mt[1])] = value;
        } else if (std::regex_match(key, mt, v_key)) {
          V[{std::stoi(mt[1]), std::stoi(mt[2])}] = value;
        } else {
          throw ConfigError("unknown key '" + where + "'");
        }
      } else if (section == "params") {
        sys.params[canonical_param_name(key)] = value;
      } else if (section == "sigma") {
        if (!std::regex_match(key, mt, sigma_key)) throw ConfigError("unknown key '" + where + "'");
        const int i = std::stoi(mt[1]) - 1;
        const int j = std::stoi(mt[2]) - 1;
        if (i < 0 || j < 0) throw ConfigError("'" + where + "': indices start at 1");
        sys.sigma[{i, j}] = value;
      } else if (section == "run") {
        if (key == "x0") {
          try {
            cfg.x0 = parse_number_list(value);
          } catch (const Error& e) {
            throw ConfigError("bad value for '" + where + "': " + e.what());
          }
        } else if (key == "T") {
          cfg.T = number_for(where, value);
        } else if (key == "rel_tol") {
          cfg.rel_tol = number_for(where, value);
        } else if (key == "abs_tol") {
          cfg.abs_tol = number_for(where, value);
        } else if (key == "rank_tol") {
          cfg.rank_tol = number_for(where, value);
        } else {
          throw ConfigError("unknown key '" + where + "'");
        }
      } else {
        throw ConfigError("unknown section [" + section + "]");
      }
    }
  }

  const auto dense = [](const std::map<int, std::string>& m, int count, const char* what) {
    std::vector<std::string> out;
    for (int k = 1; k <= count; ++k) {
      const auto it = m.find(k);
      if (it == m.end()) throw ConfigError(std::string("missing system.") + what + std::to_string(k));
      out.push_back(it->second);
    }
    if (static_cast<int>(m.size()) != count) {
      throw ConfigError(std::string("system.") + what + " entries beyond the dimension");
    }
    return out;
  };

  if (sys.type == "catalog") {
    if (sys.name.empty()) throw ConfigError("system.name is required for a catalog system");
    if (!F.empty() || !X.empty() || !V.empty()) throw ConfigError("catalog systems take no F, X or V keys");
  } else if (sys.type == "sode") {
    if (sys.m == 0) sys.m = static_cast<int>(F.size());
    if (sys.m == 0) throw ConfigError("system.m is required");
    sys.F = dense(F, sys.m, "F");
    if (!X.empty() || !V.empty()) throw ConfigError("sode systems take no X or V keys");
  } else {
    const int n = static_cast<int>(sys.coords.size());
    if (n == 0) throw ConfigError("system.coords is required for a generic system");
    if (sys.m == 0) throw ConfigError("system.m is required");
    sys.X = dense(X, n, "X");
    sys.V.assign(static_cast<std::size_t>(sys.m), std::vector<std::string>(static_cast<std::size_t>(n), "0"));
    for (const auto& [key, value] : V) {
      if (key.first < 1 || key.first > sys.m || key.second < 1 || key.second > n) {
        throw ConfigError("system.V" + std::to_string(key.first) + "_" + std::to_string(key.second) +
                          " is out of range");
      }
      sys.V[static_cast<std::size_t>(key.first - 1)][static_cast<std::size_t>(key.second - 1)] = value;
    }
  }
  if (sys.name.empty()) sys.name = sys.type;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SystemSpec build_system(const SystemConfig& config, const ParamValues& overrides) {
  ParamValues params = config.params;
  for (const auto& [k, v] : overrides) params[canonical_param_name(k)] = v;

  if (config.type == "catalog") {
    SystemSpec s = from_catalog(build(config.name, params));
    if (!config.sigma.empty()) throw ConfigError("catalog systems bring their own sigma");
    return s;
  }

  // pi is built in; a [params] entry of the same name takes precedence.
  ParamMap numeric{{"pi", std::numbers::pi}};
  for (const auto& [k, v] : params) numeric[k] = number_for("params." + k, v);

  SystemSpec s;
  s.name = config.name;
  s.params = params;
  std::size_t n = 0;
  try {
    if (config.type == "sode") {
      std::vector<Expr> F;
      for (std::size_t i = 0; i < config.F.size(); ++i) {
        F.push_back(expr_for("system.F" + std::to_string(i + 1), config.F[i]));
      }
      SodeModel model = make_sode(std::move(F), numeric, config.autonomous);
      n = model.coords().size();
      s.model = std::move(model);
    } else {
      GenericModel g;
      g.coords = config.coords;
      g.params = numeric;
      for (std::size_t i = 0; i < config.X.size(); ++i) {
        g.X.push_back(expr_for("system.X" + std::to_string(i + 1), config.X[i]));
      }
      for (std::size_t j = 0; j < config.V.size(); ++j) {
        std::vector<Expr> v;
        for (std::size_t i = 0; i < config.V[j].size(); ++i) {
          v.push_back(expr_for("system.V" + std::to_string(j + 1) + "_" + std::to_string(i + 1), config.V[j][i]));
        }
        g.V.push_back(std::move(v));
      }
      n = g.coords.size();
      s.model = std::move(g);
    }
    if (!config.sigma.empty()) {
      std::vector<std::vector<std::optional<Expr>>> partial(n, std::vector<std::optional<Expr>>(n));
      for (const auto& [ij, text] : config.sigma) {
        if (static_cast<std::size_t>(ij.first) >= n || static_cast<std::size_t>(ij.second) >= n) {
          throw ConfigError("sigma index out of range");
        }
        partial[static_cast<std::size_t>(ij.first)][static_cast<std::size_t>(ij.second)] =
            expr_for("sigma.sigma" + std::to_string(ij.first + 1) + "_" + std::to_string(ij.second + 1), text);
      }
      s.sigma = complete_antisymmetric(partial);
    }
    // Compile once so unbound names surface as config errors.
    DynamicPair probe(s.model);
    if (s.sigma) SemiHamiltonian(std::make_shared<const DynamicPair>(s.model), *s.sigma);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("system definition: ") + e.what());
  }
  return s;
}

}  // namespace conjscope
