#include "mfg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mfg/errors.hpp"
#include "mfg/reference_io.hpp"

namespace mfg {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

StudyRow make_row(const GridSpec& g, long k, const StepSchedule& s) {
  StudyRow r;
  r.n_t = g.nt();
  r.n_x = g.nx();
  r.dt = g.dt();
  r.dx = g.dx();
  r.k = k;
  r.k1 = s.k1;
  r.k2 = s.k2;
  return r;
}

void fill_metrics(StudyRow& row, const GcgState& state, const GridFunction& U,
                  const GridFunction& ref_mbar, const GridFunction& ref_u) {
  row.metric_i = metric_I(state.Mbar, ref_mbar);
  row.metric_e = metric_E(U, ref_u);
  row.metric_i_tilde = metric_I_tilde(state.Mbar, ref_mbar);
  row.phi_min = state.dmp.phi_min_observed;
  row.phi_max = state.dmp.phi_max_observed;
  row.psi_min = state.dmp.psi_min_observed;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int nt_for_ratio(const ProblemSpec& problem, int nx, double ratio) {
  if (!(ratio > 0.0)) throw ConfigError("CFL target ratio must be positive");
  const double exact = problem.T * 2.0 * problem.d * problem.nu * nx * static_cast<double>(nx) / ratio;
  return std::max(1, static_cast<int>(std::ceil(exact - 1e-9 * exact)));
}

GridSpec ladder_grid(const ProblemSpec& problem, const LadderEntry& entry, double ratio) {
  const int nt = entry.nt > 0 ? entry.nt : nt_for_ratio(problem, entry.nx, ratio);
  return make_grid(problem.d, problem.T, nt, entry.nx);
}

ReferenceSolution run_reference(const ProblemSpec& problem, const GridSpec& grid,
                                const StepSchedule& schedule, long max_iterations,
                                double plateau_tol, InitialGuessMode mode) {
  const GridFunction guess = fp_initial_guess(problem, grid, mode);
  RunOptions opts;
  opts.plateau_tol = plateau_tol;
  RunResult run = run_gcg(problem, grid, schedule, max_iterations, guess, opts);

  Provenance prov;
  prov.problem = problem.name;
  prov.k1 = schedule.k1;
  prov.k2 = schedule.k2;
  prov.iterations = run.final.k;
  prov.stop_reason = std::string(to_string(run.stop));
  prov.plateau_value = run.history.size() > 1 ? run.history.back().successive_i : 0.0;
  prov.initial_guess = std::string(to_string(mode));
  prov.timestamp = utc_timestamp();
  return ReferenceSolution(std::move(run.final.Mbar), std::move(run.final.U), std::move(prov));
}

ReferenceSolution load_or_run_reference(const std::filesystem::path& path, const ProblemSpec& problem,
                                        const GridSpec& grid, const StepSchedule& schedule,
                                        long max_iterations, double plateau_tol,
                                        InitialGuessMode mode) {
  if (std::filesystem::exists(path)) {
    try {
      ReferenceSolution ref = read_reference(path);
      const auto& p = ref.provenance;
      if (ref.grid() == grid && p.problem == problem.name && p.k1 == schedule.k1 &&
          p.k2 == schedule.k2 && p.initial_guess == to_string(mode) &&
          (p.stop_reason == "plateau" || p.iterations >= max_iterations)) {
        return ref;
      }
    } catch (const IoError&) {
      // Stale or partial file; recompute below.
    }
  }
  ReferenceSolution ref = run_reference(problem, grid, schedule, max_iterations, plateau_tol, mode);
  write_reference(path, ref, problem.nu);
  return ref;
}

std::vector<StudyRow> run_dx_study(const StudyConfig& config, const ReferenceSolution& ref) {
  const ProblemSpec problem = problem_by_name(config.problem);
  if (config.ladder.empty()) throw ConfigError("dx study: empty ladder");
  const StepSchedule schedule =
      config.schedules.empty() ? StepSchedule::fictitious_play() : config.schedules.front();

  std::vector<GridSpec> grids;
  for (const auto& e : config.ladder) {
    const GridSpec g = ladder_grid(problem, e, config.cfl_ratio);
    if (!(ref.grid().nx() > g.nx() && ref.grid().nt() > g.nt())) {
      throw ConfigError("dx study: reference grid (N_t=" + std::to_string(ref.grid().nt()) +
                        ", N_x=" + std::to_string(ref.grid().nx()) + ") is not finer than ladder entry (N_t=" +
                        std::to_string(g.nt()) + ", N_x=" + std::to_string(g.nx()) + ")");
    }
    grids.push_back(g);
  }

  std::vector<StudyRow> rows(grids.size());
  parallel_for(grids.size(), config.threads, [&](std::size_t e) {
    const GridSpec& g = grids[e];
    const auto start = std::chrono::steady_clock::now();
    const GridFunction guess = fp_initial_guess(problem, g, config.initial_guess);
    const RunResult run = run_gcg(problem, g, schedule, config.iterations, guess);
    const double wall = seconds_since(start);

    StudyRow row = make_row(g, run.final.k, schedule);
    fill_metrics(row, run.final, run.final.U, tabulate_reference(ref.Mbar, g), tabulate_reference(ref.U, g));
    row.wall_time_s = wall;
    rows[e] = row;
  });
  return rows;
}

std::vector<StudyRow> run_k_study(const StudyConfig& config, const ReferenceSolution& ref) {
  const ProblemSpec problem = problem_by_name(config.problem);
  const GridSpec& grid = ref.grid();
  if (config.ladder.size() == 1) {
    const GridSpec g = ladder_grid(problem, config.ladder.front(), config.cfl_ratio);
    if (!(g == grid)) throw GridMismatch("k study: reference grid differs from the study grid");
  }
  if (config.schedules.empty()) throw ConfigError("k study: no schedules");
  std::vector<long> samples = config.k_samples;
  if (samples.empty()) samples = geometric_samples(8, config.iterations);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
  const long last = samples.back();

  std::vector<std::vector<StudyRow>> per_schedule(config.schedules.size());
  parallel_for(config.schedules.size(), config.threads, [&](std::size_t s) {
    const StepSchedule schedule = StepSchedule::predefined(config.schedules[s].k1, config.schedules[s].k2);
    const auto start = std::chrono::steady_clock::now();
    const GridFunction guess = fp_initial_guess(problem, grid, config.initial_guess);
    auto& rows = per_schedule[s];
    std::size_t next = 0;
    RunOptions opts;
    opts.observer = [&](const GcgState& state) {
      while (next < samples.size() && samples[next] < state.k) ++next;
      if (next >= samples.size() || samples[next] != state.k) return;
      StudyRow row = make_row(grid, state.k, schedule);
      fill_metrics(row, state, value_from_phi(state.Phi, problem.nu), ref.Mbar, ref.U);
      row.wall_time_s = seconds_since(start);
      rows.push_back(row);
      ++next;
    };
    run_gcg(problem, grid, schedule, last, guess, opts);
  });

  std::vector<StudyRow> rows;
  for (auto& r : per_schedule) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

RegressionFit fit_dx_rows(const std::vector<StudyRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.dx, r.metric_i);
  return fit_loglog(pts);
}

RegressionFit fit_k_rows(const std::vector<StudyRow>& rows, const StepSchedule& schedule, long k_min) {
  std::vector<std::pair<long, double>> pts;
  for (const auto& r : rows) {
    if (r.k1 == schedule.k1 && r.k2 == schedule.k2 && r.k >= k_min) pts.emplace_back(r.k, r.metric_i);
  }
  return fit_iteration_order(pts, schedule.k1);
}

bool dx_rows_monotone(std::vector<StudyRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const StudyRow& a, const StudyRow& b) { return a.dx > b.dx; });
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!(rows[k].metric_i < rows[k - 1].metric_i)) return false;
  }
  return true;
}

std::string format_row(const StudyRow& r) {
  std::ostringstream os;
  os << r.n_t << ',' << r.n_x << ',' << fmt17(r.dt) << ',' << fmt17(r.dx) << ',' << r.k << ','
     << fmt17(r.k1) << ',' << fmt17(r.k2) << ',' << fmt17(r.metric_i) << ',' << fmt17(r.metric_e) << ','
     << fmt17(r.metric_i_tilde) << ',' << fmt17(r.phi_min) << ',' << fmt17(r.phi_max) << ','
     << fmt17(r.psi_min) << ',' << fmt17(r.wall_time_s);
  return os.str();
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<StudyRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << kStudyCsvHeader << '\n';
  for (const auto& r : rows) os << format_row(r) << '\n';
  if (!os) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<StudyRow> read_rows_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(is, line);
  if (line != kStudyCsvHeader) throw IoError("unexpected study CSV header in '" + path.string() + "'");
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 14) throw IoError("malformed study CSV row: " + line);
    StudyRow r;
    r.n_t = std::stoi(f[0]);
    r.n_x = std::stoi(f[1]);
    r.dt = std::stod(f[2]);
    r.dx = std::stod(f[3]);
    r.k = std::stol(f[4]);
    r.k1 = std::stod(f[5]);
    r.k2 = std::stod(f[6]);
    r.metric_i = std::stod(f[7]);
    r.metric_e = std::stod(f[8]);
    r.metric_i_tilde = std::stod(f[9]);
    r.phi_min = std::stod(f[10]);
    r.phi_max = std::stod(f[11]);
    r.psi_min = std::stod(f[12]);
    r.wall_time_s = std::stod(f[13]);
    rows.push_back(r);
  }
  return rows;
}

void write_fit_csv(const std::filesystem::path& path, const std::vector<FitSummary>& fits) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "study,slope,intercept,r_squared,n_points\n";
  for (const auto& f : fits) {
    os << f.study << ',' << fmt17(f.fit.slope) << ',' << fmt17(f.fit.intercept) << ','
       << fmt17(f.fit.r_squared) << ',' << f.fit.n_points << '\n';
  }
  if (!os) throw IoError("write failure on '" + path.string() + "'");
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::lock_guard lock(mu);
        if (failure || next >= count) return;
        k = next++;
      }
      try {
        body(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<long> geometric_samples(long first, long last, double factor) {
  if (first < 1 || last < first || !(factor > 1.0)) throw ConfigError("invalid geometric sample range");
  std::vector<long> out;
  double k = static_cast<double>(first);
  while (static_cast<long>(std::llround(k)) < last) {
    const long v = std::llround(k);
    if (out.empty() || out.back() != v) out.push_back(v);
    k *= factor;
  }
  out.push_back(last);
  return out;
}

}  // namespace mfg
