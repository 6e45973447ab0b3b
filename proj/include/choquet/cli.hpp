#pragma once

// Command-line front end. Kept header-only so tests can drive it in-process
// through run() exactly as the `choquet` binary does.
//
// Exit codes: 0 ok, 2 usage or expression parse error, 3 input outside the
// admissible class, 4 numerical failure, 5 derivative does not exist,
// 6 a verification property exceeded its threshold.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "choquet/capacity.hpp"
#include "choquet/choquet.hpp"
#include "choquet/error.hpp"
#include "choquet/expr.hpp"
#include "choquet/parallel.hpp"
#include "choquet/solvers.hpp"

namespace choquet::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kNotInFPlus = 3,
  kNumerical = 4,
  kNoDerivative = 5,
  kPropertyFailed = 6,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct TRange {
  double start = 0.0;
  double stop = 1.0;
  std::size_t points = 2;
};

/// Parses "start:stop:points" (inclusive endpoints).
inline TRange parse_t_range(std::string_view text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  parts.push_back(current);
  if (parts.size() != 3) throw UsageError("t-range must look like start:stop:points");
  auto number = [](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) throw UsageError("bad number '" + s + "' in t-range");
    return v;
  };
  TRange r;
  r.start = number(parts[0]);
  r.stop = number(parts[1]);
  const double count = number(parts[2]);
  if (count < 2 || count != std::floor(count) || count > 1e6) throw UsageError("t-range needs an integer point count >= 2");
  r.points = static_cast<std::size_t>(count);
  if (!(r.stop > r.start)) throw UsageError("t-range needs stop > start");
  return r;
}

struct RunConfig {
  std::string command;
  std::string g, f, m;
  double a = 0.0;
  std::string t_range;
  std::string format = "csv";
  std::string output;
  bool verify = false;  // integrate: add level-set oracle columns
  bool timing = false;
  SolverConfig solver;
  double route_tolerance = 1e-5;
  double hereditary_tolerance = 1e-5;
  double shift_tolerance = 1e-10;
};

struct Row {
  double t = 0.0;
  double value = 0.0;
  double oracle = 0.0;
  double gap = 0.0;
  bool monotone_ok = true;
};

struct RunReport {
  std::string command;
  Json inputs;
  std::vector<Row> rows;
  bool oracle_columns = false;
  Json certificates = Json::object();
  std::optional<double> residual;
  std::string verdict;
  Json properties;
  std::vector<std::string> notes;
  int exit_code = kOk;
  double elapsed_seconds = 0.0;
};

// ---------------------------------------------------------------------------
// Formatting

/// printf("%.9g") with a platform-independent spelling of non-finite values.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// JSON number rounded to 9 significant digits; null when not finite.
inline Json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

inline Json certificate_json(const MonotoneCertificate& c) {
  Json j;
  j["verdict"] = c.monotone() ? "Monotone" : "Violated";
  j["violated_at"] = c.violated_at ? Json(*c.violated_at) : Json(nullptr);
  j["max_violation"] = json_number(c.max_violation);
  j["tolerance"] = json_number(c.tolerance);
  j["points"] = c.grid.size();
  return j;
}

inline std::string to_csv(const RunReport& r) {
  std::string out = r.oracle_columns ? "t,value,oracle_value,gap,monotone_ok\n" : "t,value\n";
  for (const Row& row : r.rows) {
    out += format_number(row.t);
    out += ',';
    out += format_number(row.value);
    if (r.oracle_columns) {
      out += ',' + format_number(row.oracle) + ',' + format_number(row.gap) + ',' + (row.monotone_ok ? "1" : "0");
    }
    out += '\n';
  }
  return out;
}

inline Json to_json(const RunReport& r, bool timing) {
  Json j;
  j["command"] = r.command;
  j["inputs"] = r.inputs;
  Json points = Json::array();
  for (const Row& row : r.rows) {
    Json p;
    p["t"] = json_number(row.t);
    p["value"] = json_number(row.value);
    if (r.oracle_columns) {
      p["oracle_value"] = json_number(row.oracle);
      p["gap"] = json_number(row.gap);
    }
    p["monotone_ok"] = row.monotone_ok;
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  j["certificates"] = r.certificates;
  j["residual"] = r.residual ? json_number(*r.residual) : Json(nullptr);
  j["verdict"] = r.verdict;
  if (!r.properties.is_null()) j["properties"] = r.properties;
  j["notes"] = r.notes;
  j["exit_code"] = r.exit_code;
  if (timing) j["elapsed_seconds"] = r.elapsed_seconds;
  return j;
}

// ---------------------------------------------------------------------------
// Commands

namespace detail {

inline Expr parse_named(const std::string& name, const std::string& src) {
  if (src.empty()) throw UsageError("--" + name + " is required for this command");
  try {
    return parse(src);
  } catch (const ParseError& e) {
    throw ParseError(e.offset(), e.expected(), e.found() + " (in --" + name + ")");
  }
}

inline Grid make_grid(const RunConfig& cfg, const TRange& range) {
  if (range.start < cfg.a) throw UsageError("t-range must start at or after a");
  return Grid::uniform(range.start, range.stop, range.points);
}

inline Json quadrature_json(const QuadratureConfig& q) {
  Json j;
  j["subintervals"] = q.subintervals;
  j["nodes_per_subinterval"] = q.nodes_per_subinterval;
  j["refinement_tolerance"] = json_number(q.refinement_tolerance);
  j["max_refinements"] = q.max_refinements;
  j["endpoint_grading"] = json_number(q.endpoint_grading);
  return j;
}

inline Json inputs_json(const RunConfig& cfg, const TRange& range) {
  Json j;
  if (!cfg.g.empty()) j["g"] = cfg.g;
  if (!cfg.f.empty()) j["f"] = cfg.f;
  if (!cfg.m.empty()) j["m"] = cfg.m;
  j["a"] = json_number(cfg.a);
  j["t"] = Json{{"start", json_number(range.start)}, {"stop", json_number(range.stop)}, {"points", range.points}};
  j["quadrature"] = quadrature_json(cfg.solver.quadrature);
  j["inversion"] = Json{{"stehfest_terms", cfg.solver.inversion.stehfest_terms}};
  return j;
}

inline double working_range(const RunConfig& cfg, const TRange& range) {
  return std::max(range.stop - cfg.a, 1e-6);
}

/// Per-row monotonicity flags for a sampled output.
inline void flag_monotone(std::vector<Row>& rows, double tolerance) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double v = rows[i].value;
    bool ok = std::isfinite(v) && v >= -tolerance;
    if (i > 0 && std::isfinite(rows[i - 1].value)) ok = ok && v >= rows[i - 1].value - tolerance;
    rows[i].monotone_ok = ok;
  }
}

inline RunReport report_from_solve(const RunConfig& cfg, const TRange& range, const SolveReport& solve) {
  RunReport r;
  r.command = cfg.command;
  r.inputs = inputs_json(cfg, range);
  r.oracle_columns = true;
  for (const Sample& s : solve.samples) r.rows.push_back({s.arg, s.value, s.oracle, s.gap, true});
  flag_monotone(r.rows, solve.certificate.tolerance);
  r.certificates["output"] = certificate_json(solve.certificate);
  r.residual = solve.residual;
  r.verdict = to_string(solve.verdict);
  r.notes = solve.notes;
  return r;
}

}  // namespace detail

/// Forward Choquet integral on the grid by the convolution route; with
/// `verify`, the level-set oracle alongside.
inline RunReport run_integrate(const RunConfig& cfg) {
  const TRange range = parse_t_range(cfg.t_range);
  const Expr g = detail::parse_named("g", cfg.g);
  const Expr m = detail::parse_named("m", cfg.m);
  const Grid grid = detail::make_grid(cfg, range);
  const Distortion d = Distortion::make(m, detail::working_range(cfg, range));
  const ChoquetProblem problem = ChoquetProblem::make(cfg.a, g, d, grid);
  const QuadratureConfig& quad = cfg.solver.quadrature;

  RunReport r;
  r.command = "integrate";
  r.inputs = detail::inputs_json(cfg, range);
  r.inputs["verify"] = cfg.verify;
  r.oracle_columns = cfg.verify;
  r.rows.resize(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        Row& row = r.rows[i];
        row.t = grid[i];
        row.value = choquet_convolution(problem, grid[i], quad);
        if (cfg.verify) {
          row.oracle = choquet_level_set(problem, grid[i], quad);
          row.gap = std::fabs(row.value - row.oracle);
        }
      },
      cfg.solver.threads);

  double scale = 0.0, worst = 0.0;
  std::vector<double> ts, vs;
  for (const Row& row : r.rows) {
    scale = std::max(scale, std::fabs(row.value));
    worst = std::max(worst, row.gap / (1.0 + std::fabs(row.value)));
    ts.push_back(row.t);
    vs.push_back(row.value);
  }
  const auto output_cert = certify_samples(ts, vs, cfg.solver.monotone_tolerance * std::max(1.0, scale));
  detail::flag_monotone(r.rows, output_cert.tolerance);
  if (grid.back() > cfg.a)
    r.certificates["input"] = certificate_json(
        check_f_plus(g, cfg.a, grid.back(), cfg.solver.certificate_points, cfg.solver.monotone_tolerance));
  r.certificates["output"] = certificate_json(output_cert);
  if (cfg.verify) r.residual = worst;
  r.verdict = output_cert.monotone() ? "Exists" : "Inconclusive";
  return r;
}

inline RunReport run_derive(const RunConfig& cfg) {
  const TRange range = parse_t_range(cfg.t_range);
  const Expr f = detail::parse_named("f", cfg.f);
  const Expr m = detail::parse_named("m", cfg.m);
  const Grid grid = detail::make_grid(cfg, range);
  const Distortion d = Distortion::make(m, detail::working_range(cfg, range));
  const SolveReport solve = solve_problem2(f, d, cfg.a, grid, cfg.solver);
  RunReport r = detail::report_from_solve(cfg, range, solve);
  if (solve.verdict == Verdict::DoesNotExistInFPlus) r.exit_code = kNoDerivative;
  return r;
}

/// Rows are reported against r = t - a, the argument of the distortion.
inline RunReport run_identify(const RunConfig& cfg) {
  const TRange range = parse_t_range(cfg.t_range);
  const Expr f = detail::parse_named("f", cfg.f);
  const Expr g = detail::parse_named("g", cfg.g);
  const Grid grid = detail::make_grid(cfg, range);
  const SolveReport solve = solve_problem3(f, g, cfg.a, grid, cfg.solver);
  return detail::report_from_solve(cfg, range, solve);
}

/// Route agreement, hereditary split at the grid midpoint and shift exactness.
inline RunReport run_verify(const RunConfig& cfg) {
  const TRange range = parse_t_range(cfg.t_range);
  const Expr g = detail::parse_named("g", cfg.g);
  const Expr m = detail::parse_named("m", cfg.m);
  const Grid grid = detail::make_grid(cfg, range);
  const Distortion d = Distortion::make(m, detail::working_range(cfg, range));
  const ChoquetProblem problem = ChoquetProblem::make(cfg.a, g, d, grid);
  const ChoquetProblem shifted = shift_to_origin(problem);
  const QuadratureConfig& quad = cfg.solver.quadrature;

  RunReport r;
  r.command = "verify";
  r.inputs = detail::inputs_json(cfg, range);
  r.oracle_columns = true;
  r.rows.resize(grid.size());
  std::vector<double> level_gap(grid.size()), general_gap(grid.size()), shift_gap(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const double t = grid[i];
        const double conv = choquet_convolution(problem, t, quad);
        const double level = choquet_level_set(problem, t, quad);
        const double general = choquet_general(problem, t, quad);
        const double moved = choquet_convolution(shifted, t - cfg.a, quad);
        r.rows[i] = {t, conv, level, std::max(std::fabs(level - conv), std::fabs(general - conv)), true};
        level_gap[i] = std::fabs(level - conv) / (1.0 + std::fabs(conv));
        general_gap[i] = std::fabs(general - conv) / (1.0 + std::fabs(conv));
        const double diff = std::fabs(moved - conv);
        shift_gap[i] = conv != 0.0 ? diff / std::fabs(conv) : diff;
      },
      cfg.solver.threads);

  double scale = 0.0;
  for (const Row& row : r.rows) scale = std::max(scale, std::fabs(row.value));
  std::vector<double> ts, vs;
  for (const Row& row : r.rows) {
    ts.push_back(row.t);
    vs.push_back(row.value);
  }
  const auto output_cert = certify_samples(ts, vs, cfg.solver.monotone_tolerance * std::max(1.0, scale));
  detail::flag_monotone(r.rows, output_cert.tolerance);
  r.certificates["output"] = certificate_json(output_cert);

  const double split = 0.5 * (grid.front() + grid.back());
  const HereditaryCheck her = check_hereditary(problem, split, grid.back(), quad);
  const double her_gap = her.gap / (1.0 + std::fabs(her.lhs));

  auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  auto property = [](double gap, double threshold) {
    return Json{{"gap", json_number(gap)}, {"threshold", json_number(threshold)}, {"ok", gap <= threshold}};
  };
  r.properties["level_set_vs_convolution"] = property(max_of(level_gap), cfg.route_tolerance);
  r.properties["general_vs_convolution"] = property(max_of(general_gap), cfg.route_tolerance);
  Json hj = property(her_gap, cfg.hereditary_tolerance);
  hj["split"] = json_number(split);
  hj["t"] = json_number(grid.back());
  hj["lhs"] = json_number(her.lhs);
  hj["rhs"] = json_number(her.rhs);
  r.properties["hereditary"] = std::move(hj);
  r.properties["shift_to_origin"] = property(max_of(shift_gap), cfg.shift_tolerance);

  bool all_ok = true;
  for (const auto& [name, p] : r.properties.items()) all_ok = all_ok && p["ok"].get<bool>();
  r.residual = std::max(max_of(level_gap), max_of(general_gap));
  r.verdict = all_ok ? "AllPropertiesHold" : "PropertyViolated";
  if (!all_ok) r.exit_code = kPropertyFailed;
  return r;
}

inline RunReport run_command(const RunConfig& cfg) {
  if (cfg.command == "integrate") return run_integrate(cfg);
  if (cfg.command == "derive") return run_derive(cfg);
  if (cfg.command == "identify") return run_identify(cfg);
  if (cfg.command == "verify") return run_verify(cfg);
  throw UsageError("unknown command '" + cfg.command + "'");
}

// ---------------------------------------------------------------------------
// Entry point

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UsageError*>(&e) ||
      dynamic_cast<const InvalidGrid*>(&e) || dynamic_cast<const InvalidConfig*>(&e))
    return kUsage;
  if (dynamic_cast<const NotInFPlus*>(&e) || dynamic_cast<const InvalidDistortion*>(&e) ||
      dynamic_cast<const FNotZeroAtA*>(&e) || dynamic_cast<const NonDifferentiable*>(&e))
    return kNotInFPlus;
  return kNumerical;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Choquet integral calculus on [a, t] for distorted Lebesgue measures", "choquet"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--a", cfg.a, "Interval origin a")->capture_default_str();
    sub->add_option("--t", cfg.t_range, "Evaluation grid start:stop:points (inclusive)")->required();
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("-o,--output", cfg.output, "Write the report to this file instead of standard output");
    sub->add_option("--subintervals", cfg.solver.quadrature.subintervals, "Quadrature base subintervals")->capture_default_str();
    sub->add_option("--nodes", cfg.solver.quadrature.nodes_per_subinterval, "Gauss-Legendre nodes per subinterval")->capture_default_str();
    sub->add_option("--refine-tol", cfg.solver.quadrature.refinement_tolerance, "Relative mesh-doubling tolerance")->capture_default_str();
    sub->add_option("--max-refinements", cfg.solver.quadrature.max_refinements, "Maximum mesh doublings")->capture_default_str();
    sub->add_option("--grading", cfg.solver.quadrature.endpoint_grading, "Endpoint grading ratio in (0, 1]")->capture_default_str();
    sub->add_option("--stehfest", cfg.solver.inversion.stehfest_terms, "Gaver-Stehfest term count (even, 8..20)")->capture_default_str();
    sub->add_option("--mono-tol", cfg.solver.monotone_tolerance, "Absolute monotonicity slack")->capture_default_str();
    sub->add_option("--residual-tol", cfg.solver.residual_threshold, "Verification residual threshold")->capture_default_str();
    sub->add_option("--decisive-tol", cfg.solver.decisive_violation, "Relative size of a decisive monotonicity violation")->capture_default_str();
    sub->add_option("--threads", cfg.solver.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_flag("--timing", cfg.timing, "Report wall-clock time (makes output non-reproducible)");
  };

  auto* integrate = app.add_subcommand("integrate", "Compute f(t) = (C) int_a^t g dmu");
  integrate->add_option("--g", cfg.g, "Integrand g(t)")->required();
  integrate->add_option("--m", cfg.m, "Distortion m(t)")->required();
  integrate->add_flag("--verify", cfg.verify, "Add level-set oracle columns");
  common(integrate);

  auto* derive = app.add_subcommand("derive", "Recover the Choquet derivative g of f");
  derive->add_option("--f", cfg.f, "Primitive f(t), f(a) = 0")->required();
  derive->add_option("--m", cfg.m, "Distortion m(t)")->required();
  common(derive);

  auto* identify = app.add_subcommand("identify", "Recover the distortion m from f and g");
  identify->add_option("--f", cfg.f, "Primitive f(t), f(a) = 0")->required();
  identify->add_option("--g", cfg.g, "Integrand g(t)")->required();
  common(identify);

  auto* verify = app.add_subcommand("verify", "Run the cross-route property battery");
  verify->add_option("--g", cfg.g, "Integrand g(t)")->required();
  verify->add_option("--m", cfg.m, "Distortion m(t)")->required();
  verify->add_option("--route-tol", cfg.route_tolerance, "Route agreement threshold, relative to 1+|f|")->capture_default_str();
  verify->add_option("--hereditary-tol", cfg.hereditary_tolerance, "Hereditary gap threshold, relative to 1+|f|")->capture_default_str();
  verify->add_option("--shift-tol", cfg.shift_tolerance, "Shift-to-origin relative threshold")->capture_default_str();
  common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  RunReport report;
  const auto started = std::chrono::steady_clock::now();
  try {
    report = run_command(cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string text = cfg.format == "json" ? to_json(report, cfg.timing).dump(2) + "\n" : to_csv(report);
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << cfg.output << '\n';
      return kUsage;
    }
    file << text;
  }
  if (cfg.timing) err << "elapsed: " << report.elapsed_seconds << " s\n";
  if (cfg.command != "integrate") err << "verdict: " << report.verdict << '\n';
  return report.exit_code;
}

}  // namespace choquet::cli
