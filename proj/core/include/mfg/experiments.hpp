#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfg/gcg.hpp"
#include "mfg/initial_guess.hpp"
#include "mfg/metrics.hpp"
#include "mfg/problem.hpp"

namespace mfg {

enum class StudyKind { dx, k, reference };

/// One rung of a grid ladder; nt == 0 means "derive N_t from the CFL target ratio".
struct LadderEntry {
  int nt = 0;
  int nx = 0;
};

struct StudyConfig {
  std::string problem = "ex1d";
  StudyKind kind = StudyKind::dx;
  std::vector<LadderEntry> ladder;
  /// dx-study: the first schedule is used; k-study: one run per schedule.
  std::vector<StepSchedule> schedules{StepSchedule::fictitious_play()};
  /// dx-study iteration count, k-study cap.
  long iterations = 1000;
  /// k-study iterates at which rows are recorded.
  std::vector<long> k_samples;
  /// k-study: only rows with k >= fit_k_min enter the iteration-order fit.
  long fit_k_min = 64;
  std::filesystem::path reference_path;
  std::filesystem::path output_path;
  /// Target for 2 d nu dt / dx^2 when a ladder entry leaves N_t open.
  double cfl_ratio = 0.5;
  InitialGuessMode initial_guess = InitialGuessMode::uncontrolled;
  /// Worker threads for independent runs; 0 = hardware concurrency.
  int threads = 1;
};

struct StudyRow {
  int n_t = 0;
  int n_x = 0;
  double dt = 0.0;
  double dx = 0.0;
  long k = 0;
  double k1 = 1.0;
  double k2 = 1.0;
  double metric_i = 0.0;
  double metric_e = 0.0;
  double metric_i_tilde = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double psi_min = 0.0;
  double wall_time_s = 0.0;
};

/// Smallest N_t with 2 d nu dt / dx^2 <= ratio, rounded to the nearest
/// integer when that already satisfies the bound.
int nt_for_ratio(const ProblemSpec& problem, int nx, double ratio);
GridSpec ladder_grid(const ProblemSpec& problem, const LadderEntry& entry, double ratio);

/// Runs the GCG iteration to the plateau (successive I < plateau_tol) or the
/// cap and packages Mbar and U with provenance.
ReferenceSolution run_reference(const ProblemSpec& problem, const GridSpec& grid,
                                const StepSchedule& schedule, long max_iterations,
                                double plateau_tol,
                                InitialGuessMode mode = InitialGuessMode::uncontrolled);

/// Loads `path` if it exists and matches (problem, grid, schedule); otherwise
/// computes and persists the reference there.
ReferenceSolution load_or_run_reference(const std::filesystem::path& path, const ProblemSpec& problem,
                                        const GridSpec& grid, const StepSchedule& schedule,
                                        long max_iterations, double plateau_tol,
                                        InitialGuessMode mode = InitialGuessMode::uncontrolled);

/// One row per ladder entry: metric_I(Mbar^K), metric_E(U^K), I~(Mbar^K)
/// against the reference tabulated on the entry's grid.
std::vector<StudyRow> run_dx_study(const StudyConfig& config, const ReferenceSolution& ref);

/// One row per (schedule, sampled k) against a reference on the same grid.
std::vector<StudyRow> run_k_study(const StudyConfig& config, const ReferenceSolution& ref);

/// Slope of metric_i against dx.
RegressionFit fit_dx_rows(const std::vector<StudyRow>& rows);
/// Slope of metric_i against k + k1 for the rows of one schedule with k >= k_min.
RegressionFit fit_k_rows(const std::vector<StudyRow>& rows, const StepSchedule& schedule, long k_min = 0);

/// True when metric_i strictly decreases as dx decreases.
bool dx_rows_monotone(std::vector<StudyRow> rows);

inline constexpr const char* kStudyCsvHeader =
    "n_t,n_x,dt,dx,k,k1,k2,metric_i,metric_e,metric_i_tilde,phi_min,phi_max,psi_min,wall_time_s";

/// CSV line (no newline), floats with 17 significant digits.
std::string format_row(const StudyRow& row);
void write_rows_csv(const std::filesystem::path& path, const std::vector<StudyRow>& rows);
std::vector<StudyRow> read_rows_csv(const std::filesystem::path& path);

struct FitSummary {
  std::string study;
  RegressionFit fit;
};
void write_fit_csv(const std::filesystem::path& path, const std::vector<FitSummary>& fits);

/// Runs body(0..count-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Geometric sample ladder first, 2 first, ... capped at last (last always included).
std::vector<long> geometric_samples(long first, long last, double factor = 2.0);

}  // namespace mfg
