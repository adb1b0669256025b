#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfg/errors.hpp"
#include "mfg/experiments.hpp"
#include "mfg/gcg.hpp"
#include "mfg/initial_guess.hpp"
#include "mfg/reference_io.hpp"
#include "mfg/sweeps.hpp"

namespace mfg::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Grids and iteration budgets used when the command line leaves them open.
struct ProblemDefaults {
  int ref_nt, ref_nx;
  int k_nt, k_nx;
  double cfl_ratio;
  std::vector<int> dx_ladder;
};

ProblemDefaults defaults_for(const ProblemSpec& p) {
  if (p.d == 1) return {5760, 1200, 1000, 500, 0.5, {150, 200, 300, 400}};
  return {200, 100, 64, 80, 0.4, {20, 25, 40, 50}};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- config I/O

template <class T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void load_config_file(const fs::path& path, CliConfig& c) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known = {
      "command", "study_kind", "problem",   "nt",         "nx",        "k1",     "k2",
      "iters",   "initial_guess", "reference", "out",     "threads",   "snapshots", "plateau_tol",
      "name",    "ladder",     "schedules", "k_samples", "fit_k_min", "cfl_ratio", "ref_nt",
      "ref_nx",  "ref_iters"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config file: unknown key '" + key + "'");
    }
  }
  try {
    take(j, "problem", c.problem);
    take(j, "nt", c.nt);
    take(j, "nx", c.nx);
    take(j, "k1", c.k1);
    take(j, "k2", c.k2);
    take(j, "iters", c.iters);
    take(j, "initial_guess", c.initial_guess);
    take(j, "reference", c.reference);
    take(j, "out", c.out);
    take(j, "threads", c.threads);
    take(j, "snapshots", c.snapshots);
    take(j, "plateau_tol", c.plateau_tol);
    take(j, "name", c.name);
    take(j, "ladder", c.ladder);
    take(j, "schedules", c.schedules);
    take(j, "k_samples", c.k_samples);
    take(j, "fit_k_min", c.fit_k_min);
    take(j, "cfl_ratio", c.cfl_ratio);
    take(j, "ref_nt", c.ref_nt);
    take(j, "ref_nx", c.ref_nx);
    take(j, "ref_iters", c.ref_iters);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
}

ordered_json to_json(const CliConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  if (!c.study_kind.empty()) j["study_kind"] = c.study_kind;
  j["problem"] = c.problem;
  j["nt"] = c.nt;
  j["nx"] = c.nx;
  j["k1"] = c.k1;
  j["k2"] = c.k2;
  j["iters"] = c.iters;
  j["initial_guess"] = c.initial_guess;
  j["reference"] = c.reference;
  j["out"] = c.out;
  j["threads"] = c.threads;
  j["snapshots"] = c.snapshots;
  j["plateau_tol"] = c.plateau_tol;
  j["name"] = c.name;
  if (c.command == "study") {
    j["ladder"] = c.ladder;
    j["schedules"] = c.schedules;
    j["k_samples"] = c.k_samples;
    j["fit_k_min"] = c.fit_k_min;
    j["cfl_ratio"] = c.cfl_ratio;
    j["ref_nt"] = c.ref_nt;
    j["ref_nx"] = c.ref_nx;
    j["ref_iters"] = c.ref_iters;
  }
  return j;
}

void echo_config(const CliConfig& c) {
  const fs::path path = fs::path(c.out) / "config.json";
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << to_json(c).dump(2) << '\n';
}

// ---------------------------------------------------------------- parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& what) {
  const double v = parse_number(s, what);
  if (v != std::floor(v) || v < 0 || v > std::numeric_limits<int>::max()) {
    throw ConfigError(what + " must be a nonnegative integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

/// "k1:k2"
StepSchedule parse_schedule(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw ConfigError("schedule '" + s + "' must look like k1:k2");
  return StepSchedule::predefined(parse_number(parts[0], "k1"), parse_number(parts[1], "k2"));
}

/// "nx" or "nt:nx"
LadderEntry parse_ladder_entry(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) return {0, parse_int(parts[0], "ladder N_x")};
  if (parts.size() == 2) return {parse_int(parts[0], "ladder N_t"), parse_int(parts[1], "ladder N_x")};
  throw ConfigError("ladder entry '" + s + "' must look like nx or nt:nx");
}

std::string schedule_label(const StepSchedule& s) { return fmt(s.k1) + ":" + fmt(s.k2); }

// ---------------------------------------------------------------- validation

void require_out_dir(const CliConfig& c) {
  if (c.out.empty() || !fs::is_directory(c.out)) {
    throw ConfigError("output directory '" + c.out + "' does not exist");
  }
}

int resolve_threads(int threads) {
  if (threads < 0) throw ConfigError("--threads must be >= 0");
  if (threads > 0) return threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

GridSpec grid_for(const ProblemSpec& p, int nt, int nx) {
  if (nt <= 0 || nx <= 0) throw ConfigError("grid: --nt and --nx must be positive");
  return make_grid(p.d, p.T, nt, nx);
}

StepSchedule schedule_from(const CliConfig& c, double dk1, double dk2) {
  const double k1 = c.k1 > 0 ? c.k1 : dk1;
  const double k2 = c.k2 > 0 ? c.k2 : (c.k1 > 0 ? std::min(c.k1, dk2) : dk2);
  return StepSchedule::predefined(k1, k2);
}

// ---------------------------------------------------------------- subcommands

int cmd_solve(CliConfig c, std::ostream& out) {
  require_out_dir(c);
  const ProblemSpec problem = problem_by_name(c.problem);
  const auto dflt = defaults_for(problem);
  if (c.nt == 0) c.nt = dflt.k_nt;
  if (c.nx == 0) c.nx = dflt.k_nx;
  if (c.iters < 0) c.iters = 1000;
  const StepSchedule schedule = schedule_from(c, 1.0, 1.0);
  c.k1 = schedule.k1;
  c.k2 = schedule.k2;
  if (c.plateau_tol < 0) c.plateau_tol = 0.0;
  const InitialGuessMode mode = parse_initial_guess_mode(c.initial_guess);
  const GridSpec grid = grid_for(problem, c.nt, c.nx);
  for (long k : c.snapshots) {
    if (k < 0 || k > c.iters) throw ConfigError("snapshot iteration " + std::to_string(k) + " outside [0, iters]");
  }
  echo_config(c);

  const fs::path dir(c.out);
  auto snapshot_ref = [&](const GridFunction& mbar, const GridFunction& u, long k, std::string_view stop) {
    Provenance prov;
    prov.problem = problem.name;
    prov.k1 = schedule.k1;
    prov.k2 = schedule.k2;
    prov.iterations = k;
    prov.stop_reason = std::string(stop);
    prov.initial_guess = c.initial_guess;
    return ReferenceSolution(mbar, u, prov);
  };

  RunOptions opts;
  opts.plateau_tol = c.plateau_tol;
  opts.observer = [&](const GcgState& s) {
    if (std::find(c.snapshots.begin(), c.snapshots.end(), s.k) == c.snapshots.end()) return;
    const auto u = value_from_phi(s.Phi, problem.nu);
    write_reference(dir / ("snapshot_k" + std::to_string(s.k) + ".bin"),
                    snapshot_ref(s.Mbar, u, s.k, "snapshot"), problem.nu);
  };
  const GridFunction guess = fp_initial_guess(problem, grid, mode);
  const RunResult run = run_gcg(problem, grid, schedule, c.iters, guess, opts);

  write_reference(dir / "solution.bin",
                  snapshot_ref(run.final.Mbar, run.final.U, run.final.k, to_string(run.stop)), problem.nu);
  {
    const fs::path path = dir / "diagnostics.csv";
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    os << "k,delta,successive_i,phi_min,phi_max,psi_min,psi_max\n";
    char buf[512];
    for (const auto& r : run.history) {
      std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k, r.delta, r.successive_i,
                    r.phi_min, r.phi_max, r.psi_min, r.psi_max);
      os << buf;
    }
    if (!os) throw IoError("write failure on '" + path.string() + "'");
  }

  const auto& last = run.history.back();
  out << "solve " << problem.name << " N_t=" << grid.nt() << " N_x=" << grid.nx() << " k=" << run.final.k
      << " stop=" << to_string(run.stop) << " successive_i=" << fmt(last.successive_i) << " phi=["
      << fmt(last.phi_min) << "," << fmt(last.phi_max) << "] psi_min=" << fmt(last.psi_min) << '\n';
  return kOk;
}

int cmd_reference(CliConfig c, std::ostream& out) {
  require_out_dir(c);
  const ProblemSpec problem = problem_by_name(c.problem);
  const auto dflt = defaults_for(problem);
  if (c.nt == 0) c.nt = dflt.ref_nt;
  if (c.nx == 0) c.nx = dflt.ref_nx;
  if (c.iters < 0) c.iters = 5000;
  if (c.plateau_tol < 0) c.plateau_tol = 1e-9;
  if (c.name.empty()) c.name = "reference.bin";
  const StepSchedule schedule = schedule_from(c, 10.0, 10.0);
  c.k1 = schedule.k1;
  c.k2 = schedule.k2;
  const InitialGuessMode mode = parse_initial_guess_mode(c.initial_guess);
  const GridSpec grid = grid_for(problem, c.nt, c.nx);
  echo_config(c);

  const ReferenceSolution ref = run_reference(problem, grid, schedule, c.iters, c.plateau_tol, mode);
  const fs::path file = fs::path(c.out) / c.name;
  write_reference(file, ref, problem.nu);
  out << "reference " << problem.name << " N_t=" << grid.nt() << " N_x=" << grid.nx()
      << " iterations=" << ref.provenance.iterations << " stop=" << ref.provenance.stop_reason
      << " plateau=" << fmt(ref.provenance.plateau_value) << " file=" << file.string() << '\n';
  return kOk;
}

ReferenceSolution study_reference(CliConfig& c, const ProblemSpec& problem, const GridSpec& grid,
                                  const std::string& cache_name, InitialGuessMode mode) {
  if (!c.reference.empty()) {
    if (!fs::exists(c.reference)) throw ConfigError("reference file '" + c.reference + "' does not exist");
    ReferenceSolution ref = read_reference(c.reference);
    const auto h = read_reference_header(c.reference);
    if (ref.grid().dim() != problem.d || std::abs(h.T - problem.T) > 1e-12 || std::abs(h.nu - problem.nu) > 1e-15) {
      throw ConfigError("reference file '" + c.reference + "' does not belong to problem " + problem.name);
    }
    if (!ref.provenance.problem.empty() && ref.provenance.problem != problem.name) {
      throw ConfigError("reference file '" + c.reference + "' was computed for problem " + ref.provenance.problem);
    }
    return ref;
  }
  const fs::path file = fs::path(c.out) / cache_name;
  c.reference = file.string();
  return load_or_run_reference(file, problem, grid, StepSchedule::predefined(10, 10), c.ref_iters, 1e-9, mode);
}

int cmd_study_dx(CliConfig c, std::ostream& out, std::ostream& err) {
  require_out_dir(c);
  const ProblemSpec problem = problem_by_name(c.problem);
  const auto dflt = defaults_for(problem);
  if (c.ladder.empty()) {
    for (int nx : dflt.dx_ladder) c.ladder.push_back(std::to_string(nx));
  }
  if (c.cfl_ratio == 0.0) c.cfl_ratio = dflt.cfl_ratio;
  if (c.iters < 0) c.iters = 1000;
  if (c.ref_nt == 0) c.ref_nt = dflt.ref_nt;
  if (c.ref_nx == 0) c.ref_nx = dflt.ref_nx;
  if (c.ref_iters == 0) c.ref_iters = 5000;
  const StepSchedule schedule = schedule_from(c, 1.0, 1.0);
  c.k1 = schedule.k1;
  c.k2 = schedule.k2;
  c.threads = resolve_threads(c.threads);
  const InitialGuessMode mode = parse_initial_guess_mode(c.initial_guess);

  StudyConfig sc;
  sc.problem = problem.name;
  sc.kind = StudyKind::dx;
  for (const auto& e : c.ladder) sc.ladder.push_back(parse_ladder_entry(e));
  sc.schedules = {schedule};
  sc.iterations = c.iters;
  sc.cfl_ratio = c.cfl_ratio;
  sc.initial_guess = mode;
  sc.threads = c.threads;
  // Validate every rung (and its CFL bound) before the expensive reference.
  for (const auto& e : sc.ladder) {
    const GridSpec g = ladder_grid(problem, e, sc.cfl_ratio);
    require_cfl(g, problem.nu, AdvectionSamples(g, problem.advection), "dx study ladder");
  }
  if (sc.ladder.size() < 2) throw ConfigError("dx study needs at least two ladder entries");

  const GridSpec ref_grid = grid_for(problem, c.ref_nt, c.ref_nx);
  const std::string cache = "reference_" + problem.name + "_" + std::to_string(c.ref_nt) + "x" +
                            std::to_string(c.ref_nx) + ".bin";
  echo_config(c);
  const ReferenceSolution ref = study_reference(c, problem, ref_grid, cache, mode);
  echo_config(c);

  sc.reference_path = c.reference;
  const auto rows = run_dx_study(sc, ref);
  const fs::path dir(c.out);
  write_rows_csv(dir / "study_dx.csv", rows);
  const RegressionFit fit = fit_dx_rows(rows);
  write_fit_csv(dir / "fit_dx.csv", {{"dx", fit}});
  if (!dx_rows_monotone(rows)) err << "warning: metric_I is not strictly decreasing along the ladder\n";
  out << "study dx " << problem.name << " rungs=" << rows.size() << " slope=" << fmt(fit.slope)
      << " r2=" << fmt(fit.r_squared) << '\n';
  return kOk;
}

int cmd_study_k(CliConfig c, std::ostream& out) {
  require_out_dir(c);
  const ProblemSpec problem = problem_by_name(c.problem);
  const auto dflt = defaults_for(problem);
  if (c.nt == 0) c.nt = dflt.k_nt;
  if (c.nx == 0) c.nx = dflt.k_nx;
  if (c.iters < 0) c.iters = 1024;
  if (c.ref_iters == 0) c.ref_iters = 5000;
  if (c.fit_k_min < 0) c.fit_k_min = 64;
  if (c.schedules.empty()) c.schedules = {"1:1", "2:2", "3:3", "2:1", "3:2", "3:1"};
  if (c.k_samples.empty()) c.k_samples = geometric_samples(8, c.iters);
  c.threads = resolve_threads(c.threads);
  const InitialGuessMode mode = parse_initial_guess_mode(c.initial_guess);

  StudyConfig sc;
  sc.problem = problem.name;
  sc.kind = StudyKind::k;
  sc.ladder = {{c.nt, c.nx}};
  sc.schedules.clear();
  for (const auto& s : c.schedules) sc.schedules.push_back(parse_schedule(s));
  sc.iterations = c.iters;
  sc.k_samples = c.k_samples;
  sc.fit_k_min = c.fit_k_min;
  sc.initial_guess = mode;
  sc.threads = c.threads;
  for (long k : sc.k_samples) {
    if (k < 0) throw ConfigError("k samples must be >= 0");
  }
  const GridSpec grid = grid_for(problem, c.nt, c.nx);
  require_cfl(grid, problem.nu, AdvectionSamples(grid, problem.advection), "k study");

  const std::string cache =
      "reference_" + problem.name + "_" + std::to_string(c.nt) + "x" + std::to_string(c.nx) + ".bin";
  echo_config(c);
  const ReferenceSolution ref = study_reference(c, problem, grid, cache, mode);
  if (!(ref.grid() == grid)) {
    throw GridMismatch("k study: reference grid (N_t=" + std::to_string(ref.grid().nt()) +
                       ", N_x=" + std::to_string(ref.grid().nx()) + ") differs from the study grid");
  }
  echo_config(c);

  sc.reference_path = c.reference;
  const auto rows = run_k_study(sc, ref);
  const fs::path dir(c.out);
  write_rows_csv(dir / "study_k.csv", rows);
  std::vector<FitSummary> fits;
  std::ostringstream summary;
  summary << "study k " << problem.name;
  for (const auto& s : sc.schedules) {
    const RegressionFit fit = fit_k_rows(rows, s, sc.fit_k_min);
    fits.push_back({"k:" + schedule_label(s), fit});
    summary << " (" << fmt(s.k1) << "," << fmt(s.k2) << ")=" << fmt(fit.slope);
  }
  write_fit_csv(dir / "fit_k.csv", fits);
  out << summary.str() << '\n';
  return kOk;
}

// ---------------------------------------------------------------- CLI11 wiring

void add_common(CLI::App& app, CliConfig& c, std::string& config_path) {
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--problem", c.problem, "ex1d | ex1d-adv | ex2d");
  app.add_option("--out", c.out, "existing output directory");
  app.add_option("--initial-guess", c.initial_guess, "uncontrolled | zero-drift");
  app.add_option("--k1", c.k1, "step-size parameter k1");
  app.add_option("--k2", c.k2, "step-size parameter k2");
  app.add_option("--iters", c.iters, "iteration count (cap)");
}

}  // namespace

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const CflViolation&) {
    return kCflViolation;
  } catch (const DmpBreach&) {
    return kDmpBreach;
  } catch (const ConfigError&) {
    return kConfigError;
  } catch (const GridMismatch&) {
    return kConfigError;
  } catch (const SamplingError&) {
    return kConfigError;
  } catch (...) {
    return kFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  std::string config_path;

  CLI::App app{"Fully discrete GCG solver for mean field games", "mfg-gcg"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "run one GCG solve");
  add_common(*solve, c, config_path);
  solve->add_option("--nt", c.nt, "time subdivisions");
  solve->add_option("--nx", c.nx, "space subdivisions per axis");
  solve->add_option("--snapshots", c.snapshots, "iterations to snapshot")->delimiter(',');
  solve->add_option("--plateau-tol", c.plateau_tol, "stop once successive I < tol");

  auto* reference = app.add_subcommand("reference", "compute a reference solution");
  add_common(*reference, c, config_path);
  reference->add_option("--nt", c.nt, "time subdivisions");
  reference->add_option("--nx", c.nx, "space subdivisions per axis");
  reference->add_option("--plateau-tol", c.plateau_tol, "plateau tolerance (default 1e-9)");
  reference->add_option("--name", c.name, "file name inside --out (default reference.bin)");

  auto* study = app.add_subcommand("study", "convergence studies");
  study->require_subcommand(1);
  auto add_study_common = [&](CLI::App& s) {
    add_common(s, c, config_path);
    s.add_option("--reference", c.reference, "existing reference file");
    s.add_option("--threads", c.threads, "worker threads (0 = available parallelism)");
    s.add_option("--ref-iters", c.ref_iters, "reference iteration cap");
  };
  auto* dx = study->add_subcommand("dx", "mesh-size convergence study");
  add_study_common(*dx);
  dx->add_option("--ladder", c.ladder, "ladder entries nx or nt:nx")->delimiter(',');
  dx->add_option("--cfl-ratio", c.cfl_ratio, "target 2 d nu dt / dx^2 for derived N_t");
  dx->add_option("--ref-nt", c.ref_nt, "reference N_t when no file is given");
  dx->add_option("--ref-nx", c.ref_nx, "reference N_x when no file is given");
  auto* k = study->add_subcommand("k", "iteration-order study");
  add_study_common(*k);
  k->add_option("--nt", c.nt, "time subdivisions");
  k->add_option("--nx", c.nx, "space subdivisions per axis");
  k->add_option("--schedules", c.schedules, "schedules k1:k2")->delimiter(',');
  k->add_option("--k-samples", c.k_samples, "iterations at which rows are recorded")->delimiter(',');
  k->add_option("--fit-k-min", c.fit_k_min, "smallest k entering the fit (default 64)");

  try {
    // The config file is applied first so that explicit flags override it.
    for (std::size_t a = 0; a + 1 < args.size(); ++a) {
      if (args[a] == "--config") load_config_file(args[a + 1], c);
      else if (args[a].rfind("--config=", 0) == 0) load_config_file(args[a].substr(9), c);
    }
    if (!args.empty() && args.back() == "--config") throw ConfigError("--config needs a file argument");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return kConfigError;
    }

    if (solve->parsed()) {
      c.command = "solve";
      return cmd_solve(c, out);
    }
    if (reference->parsed()) {
      c.command = "reference";
      return cmd_reference(c, out);
    }
    c.command = "study";
    if (dx->parsed()) {
      c.study_kind = "dx";
      return cmd_study_dx(c, out, err);
    }
    c.study_kind = "k";
    return cmd_study_k(c, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(std::current_exception());
  }
}

}  // namespace mfg::cli
