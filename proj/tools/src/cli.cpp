#include "conjscope_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "conjscope/analysis.hpp"
#include "conjscope/catalog.hpp"
#include "conjscope/config.hpp"
#include "conjscope/errors.hpp"
#include "conjscope/report.hpp"
#include "json.hpp"

#ifndef CONJSCOPE_VERSION
#define CONJSCOPE_VERSION "unknown"
#endif

namespace conjscope::cli {

namespace fs = std::filesystem;

namespace {

struct SystemArgs {
  std::string system;
  std::string config;
  std::vector<std::string> params;
  std::string x0;
  std::string T;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> rank_tol;
  std::string out = ".";
  bool json = false;
  bool csv = false;
};

struct SweepArgs {
  std::string param;
  std::optional<double> from;
  std::optional<double> to;
  int count = 0;
  std::string values;
};

void add_system_options(CLI::App& app, SystemArgs& a) {
  app.add_option("--system", a.system, "Catalog entry to analyse");
  app.add_option("--config", a.config, "INI file describing the system")->check(CLI::ExistingFile);
  app.add_option("--param", a.params, "Parameter override k=v (repeatable)");
  app.add_option("--x0", a.x0, "Initial state, comma separated");
  app.add_option("--T", a.T, "Time horizon (a constant expression such as 3*pi)");
  app.add_option("--rel-tol", a.rel_tol, "Relative integration tolerance");
  app.add_option("--abs-tol", a.abs_tol, "Absolute integration tolerance");
  app.add_option("--rank-tol", a.rank_tol, "Relative rank tolerance for conjugate detection");
  app.add_option("--out", a.out, "Output directory");
  app.add_flag("--json", a.json, "Print the JSON result on stdout");
  app.add_flag("--csv", a.csv, "Print the CSV result on stdout");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Everything resolved from flags and config that one analysis needs.
struct Job {
  SystemConfig config;
  ParamValues overrides;
  std::optional<Vec> x0;
  std::optional<double> T;
  AnalysisOptions options;
};

Job make_job(const SystemArgs& a) {
  if (a.system.empty() == a.config.empty()) {
    throw ConfigError("give exactly one of --system and --config");
  }
  Job job;
  RunConfig rc;
  if (!a.config.empty()) {
    rc = load_config(a.config);
  } else {
    rc.system.type = "catalog";
    rc.system.name = a.system;
  }
  job.config = rc.system;
  for (const auto& p : a.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects k=v, got '" + p + "'");
    job.overrides[canonical_param_name(p.substr(0, eq))] = p.substr(eq + 1);
  }
  if (!a.x0.empty()) {
    const auto v = parse_number_list(a.x0);
    job.x0 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
  } else if (rc.x0) {
    job.x0 = Eigen::Map<const Vec>(rc.x0->data(), static_cast<Eigen::Index>(rc.x0->size()));
  }
  job.T = a.T.empty() ? rc.T : std::optional<double>(parse_number(a.T));
  auto& o = job.options;
  if (const auto v = a.rel_tol ? a.rel_tol : rc.rel_tol) o.integrator.rel_tol = *v;
  if (const auto v = a.abs_tol ? a.abs_tol : rc.abs_tol) o.integrator.abs_tol = *v;
  if (const auto v = a.rank_tol ? a.rank_tol : rc.rank_tol) o.rank_tol = *v;
  if (!(o.integrator.rel_tol > 0.0) || !(o.integrator.abs_tol > 0.0) || !(o.rank_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  return job;
}

AnalysisReport run_job(const Job& job, const ParamValues& extra = {}) {
  ParamValues overrides = job.overrides;
  for (const auto& [k, v] : extra) overrides[k] = v;
  const SystemSpec spec = build_system(job.config, overrides);
  const Vec x0 = job.x0 ? *job.x0 : spec.default_x0;
  const double T = job.T ? *job.T : spec.default_T;
  if (x0.size() == 0) throw ConfigError("no initial state: pass --x0 or set run.x0");
  if (!(T > 0.0)) throw ConfigError("no time horizon: pass --T or set run.T");
  return analyze(spec, x0, T, job.options);
}

int exit_code(const AnalysisReport& r) {
  if (!r.regularity.ok) return kRegularityFailure;
  if (r.any_violated()) return kViolated;
  return kOk;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << body;
  if (!f) throw ConfigError("write failed for '" + path.string() + "'");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create '" + dir.string() + "': " + ec.message());
}

void write_run_metadata(const fs::path& dir, const std::string& command, double seconds, int threads) {
  nlohmann::json j = {{"tool", "conjscope"},
                      {"version", CONJSCOPE_VERSION},
                      {"command", command},
                      {"wall_seconds", seconds},
                      {"threads", threads}};
  write_file(dir / "run.json", j.dump(2) + "\n");
}

void print_bounds(std::ostream& out, const BoundsRecord& b) {
  out << "bounds (" << b.metric << " metric)\n";
  out << "  safe interval    (0, " << short_fmt(b.t_c) << ")  lambda_max " << short_fmt(b.lambda_max)
      << "  [" << b.thm1 << "]\n";
  out << "  trace bound      ";
  if (b.T_star) {
    out << "T* = " << short_fmt(*b.T_star);
  } else {
    out << "none (" << b.thm2_reason << ")";
  }
  out << "  inf tr K " << short_fmt(b.trK_min) << "  [" << b.thm2 << "]\n";
  out << "  eigenline tracks " << b.tracks.size() << "  [" << b.thm3 << "]\n";
  for (const auto& t : b.tracks) {
    out << "    kappa " << short_fmt(t.kappa) << "  zeros";
    if (t.sturm_zeros.empty()) out << " none";
    for (double z : t.sturm_zeros) out << ' ' << short_fmt(z);
    out << '\n';
  }
  for (const auto& n : b.notes) out << "  note: " << n << '\n';
}

void print_summary(std::ostream& out, const AnalysisReport& r) {
  out << "system " << r.system << "  m=" << r.m << " n=" << r.n;
  for (const auto& [k, v] : r.params) out << "  " << k << '=' << v;
  out << '\n';
  out << "trajectory T=" << short_fmt(r.trajectory.T) << "  steps " << r.trajectory.accepted_steps
      << " accepted, " << r.trajectory.rejected_steps << " rejected\n";
  const auto& rg = r.regularity;
  if (!rg.ok) {
    out << "regularity FAILED: " << rg.failure << '\n';
    return;
  }
  out << "regularity ok  max cond " << short_fmt(rg.max_cond_D) << "  max residual "
      << short_fmt(rg.max_residual) << '\n';
  out << "conjugate times";
  if (r.conjugate_times.empty()) out << " none";
  out << '\n';
  for (const auto& c : r.conjugate_times) {
    out << "  " << fmt(c.t) << "  multiplicity " << c.multiplicity << "  " << c.mode << '\n';
  }
  if (r.oracle_times) {
    out << "oracle times   ";
    if (r.oracle_times->empty()) out << " none";
    for (const auto& c : *r.oracle_times) out << ' ' << short_fmt(c.t) << " (x" << c.multiplicity << ')';
    out << '\n';
  }
  if (r.min_sigma) out << "min sigma_min(P) " << short_fmt(*r.min_sigma) << '\n';
  print_bounds(out, r.bounds);
  if (r.sigma_bounds) print_bounds(out, *r.sigma_bounds);
  if (r.hamiltonian) {
    const auto& h = *r.hamiltonian;
    out << "semi-Hamiltonian  lagrangian " << short_fmt(h.lagrangian_residual) << "  invariance "
        << short_fmt(h.semi_invariance_residual) << "  gK symmetry " << short_fmt(h.selfadjoint_residual)
        << "  metric drift " << short_fmt(h.metric_drift) << '\n';
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

int cmd_analyze(const SystemArgs& a, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const Job job = make_job(a);
  const AnalysisReport r = run_job(job);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path dir(a.out);
  prepare_dir(dir);
  const std::string json = to_json_string(r);
  const std::string csv = curves_csv(r.curves);
  write_file(dir / "report.json", json);
  write_file(dir / "curves.csv", csv);
  write_run_metadata(dir, "analyze", seconds, 1);

  if (a.json) out << json;
  if (a.csv) out << csv;
  if (!a.json && !a.csv) print_summary(out, r);
  return exit_code(r);
}

std::vector<std::string> sweep_values(const SweepArgs& s) {
  if (!s.values.empty()) {
    if (s.from || s.to || s.count) throw ConfigError("use either --values or --from/--to/--count");
    std::vector<std::string> out;
    std::stringstream ss(s.values);
    for (std::string v; std::getline(ss, v, ',');) {
      parse_number(v);
      out.push_back(v);
    }
    return out;
  }
  if (!s.from || !s.to || s.count < 1) throw ConfigError("sweep needs --values or --from, --to and --count");
  std::vector<std::string> out;
  for (int k = 0; k < s.count; ++k) {
    const double v = s.count == 1 ? *s.from : *s.from + (*s.to - *s.from) * k / (s.count - 1);
    out.push_back(fmt(v));
  }
  return out;
}

int sweep_threads(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONJSCOPE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || cap < 1) throw ConfigError("CONJSCOPE_THREADS must be a positive integer");
    n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(1, jobs)));
}

struct SweepRow {
  std::string value;
  std::optional<AnalysisReport> report;
  std::string error;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "param,value,status,first_conjugate_time,first_multiplicity,conjugate_times,min_sigma_min,"
        "thm1,thm2,thm3\n";
  for (const auto& row : rows) {
    os << csv_field(param) << ',' << csv_field(row.value) << ',';
    if (!row.report) {
      os << "error,NONE,,,,,,\n";
      continue;
    }
    const auto& r = *row.report;
    os << (r.regularity.ok ? "ok" : "regularity_failure") << ',';
    if (r.conjugate_times.empty()) {
      os << "NONE,,";
    } else {
      os << fmt(r.conjugate_times.front().t) << ',' << r.conjugate_times.front().multiplicity << ',';
    }
    std::string times;
    for (const auto& c : r.conjugate_times) times += (times.empty() ? "" : ";") + fmt(c.t);
    os << times << ',' << (r.min_sigma ? fmt(*r.min_sigma) : "") << ',';
    os << r.bounds.thm1 << ',' << r.bounds.thm2 << ',' << r.bounds.thm3 << '\n';
  }
  return os.str();
}

int cmd_sweep(const SystemArgs& a, const SweepArgs& s, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const Job job = make_job(a);
  const std::string param = canonical_param_name(s.param);
  if (param.empty()) throw ConfigError("--sweep-param is required");
  if (job.overrides.count(param)) throw ConfigError("'" + param + "' is both swept and fixed by --param");
  const auto values = sweep_values(s);
  // Fail early on a bad parameter name rather than once per value.
  build_system(job.config, [&] {
    ParamValues p = job.overrides;
    p[param] = values.front();
    return p;
  }());

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  const int threads = sweep_threads(values.size());
  const auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < values.size();) {
      rows[k].value = values[k];
      try {
        rows[k].report = run_job(job, {{param, values[k]}});
      } catch (const std::exception& e) {
        rows[k].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string csv = sweep_csv(param, rows);
  const fs::path dir(a.out);
  prepare_dir(dir);
  write_file(dir / "sweep.csv", csv);
  write_run_metadata(dir, "sweep", seconds, threads);

  int code = kOk;
  for (const auto& row : rows) {
    if (!row.report) {
      err << "error: " << param << '=' << row.value << ": " << row.error << '\n';
      code = std::max(code, static_cast<int>(kUserError));
    }
  }
  for (const auto& row : rows) {
    if (row.report) code = std::max(code, exit_code(*row.report));
  }
  if (a.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      arr.push_back(row.report ? nlohmann::json::parse(to_json_string(*row.report))
                               : nlohmann::json{{"error", row.error}, {"value", row.value}});
    }
    out << arr.dump(2) << '\n';
  }
  if (a.csv || !a.json) out << csv;
  return code;
}

int cmd_catalog(const std::string& name, bool json, std::ostream& out) {
  std::vector<const CatalogEntry*> entries;
  if (name.empty()) {
    for (const auto& e : catalog()) entries.push_back(&e);
  } else {
    entries.push_back(&catalog_entry(name));
  }
  if (json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto* e : entries) {
      nlohmann::json params = nlohmann::json::array();
      for (const auto& p : e->params) {
        params.push_back({{"name", p.name},
                          {"default", p.default_value},
                          {"description", p.description},
                          {"expression", p.expression}});
      }
      nlohmann::json facts = nlohmann::json::array();
      for (const auto& f : e->facts) {
        nlohmann::json jf = {{"id", f.id},
                             {"description", f.description},
                             {"source", f.source},
                             {"tolerance", f.tolerance},
                             {"params", std::map<std::string, std::string>(f.params.begin(), f.params.end())},
                             {"x0", f.x0},
                             {"T", f.T},
                             {"conjugate_times", f.conjugate_times},
                             {"multiplicities", f.multiplicities}};
        jf["curvature"] = f.curvature ? nlohmann::json(*f.curvature) : nlohmann::json(nullptr);
        facts.push_back(std::move(jf));
      }
      arr.push_back({{"name", e->name},
                     {"description", e->description},
                     {"params", params},
                     {"default_x0", e->default_x0},
                     {"default_T", e->default_T},
                     {"facts", facts}});
    }
    out << arr.dump(2) << '\n';
    return kOk;
  }
  for (const auto* e : entries) {
    out << e->name << "\n  " << e->description << '\n';
    for (const auto& p : e->params) {
      out << "  param " << p.name << " = " << p.default_value;
      if (!p.description.empty()) out << "  (" << p.description << ')';
      out << '\n';
    }
    out << "  default x0 = (";
    for (std::size_t i = 0; i < e->default_x0.size(); ++i) out << (i ? ", " : "") << short_fmt(e->default_x0[i]);
    out << "), T = " << short_fmt(e->default_T) << '\n';
    for (const auto& f : e->facts) {
      out << "  fact [" << f.source << "] " << f.id << ": " << f.description << " (tol "
          << short_fmt(f.tolerance) << ")\n";
    }
    out << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conjugate times and curvature of dynamic pairs", "conjscope"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CONJSCOPE_VERSION);

  SystemArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Analyse one system along one trajectory");
  add_system_options(*analyze, analyze_args);

  SystemArgs sweep_args;
  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat the analysis over values of one parameter");
  add_system_options(*sweep_cmd, sweep_args);
  sweep_cmd->add_option("--sweep-param", sweep.param, "Parameter to vary")->required();
  sweep_cmd->add_option("--from", sweep.from, "First value");
  sweep_cmd->add_option("--to", sweep.to, "Last value");
  sweep_cmd->add_option("--count", sweep.count, "Number of evenly spaced values");
  sweep_cmd->add_option("--values", sweep.values, "Explicit comma separated values");

  std::string entry;
  bool catalog_json = false;
  auto* catalog_cmd = app.add_subcommand("catalog", "List the built-in systems and their known facts");
  catalog_cmd->add_option("name", entry, "Show a single entry");
  catalog_cmd->add_flag("--json", catalog_json, "Machine-readable listing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_args, out);
    if (*sweep_cmd) return cmd_sweep(sweep_args, sweep, out, err);
    return cmd_catalog(entry, catalog_json, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  }
}

}  // namespace conjscope::cli
