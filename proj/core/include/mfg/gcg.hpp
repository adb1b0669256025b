#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/operators.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Predefined step sizes delta_k = k2 / (k + k1) with 1 <= k2 <= k1.
/// Fictitious play is (k1, k2) = (1, 1).
struct StepSchedule {
  double k1 = 1.0;
  double k2 = 1.0;

  static StepSchedule predefined(double k1, double k2);
  static StepSchedule fictitious_play() { return {1.0, 1.0}; }

  double step_size(long k) const { return k2 / (static_cast<double>(k) + k1); }
};

double step_size(const StepSchedule& schedule, long k);

/// Explicit bounds on the value factor Phi implied by the discrete maximum principle:
///   phi_upper = max_i exp(-g_i / 2nu),
///   phi_lower = exp(-C0 T / 2nu) * min_i exp(-g_i / 2nu).
struct DmpBounds {
  double phi_lower = 0.0;
  double phi_upper = 0.0;
};

DmpBounds dmp_bounds(const ProblemSpec& problem, const GridSpec& grid);

struct DmpDiagnostics {
  double phi_min_observed = 0.0;
  double phi_max_observed = 0.0;
  double psi_min_observed = 0.0;
  double psi_max_observed = 0.0;
  CflReport cfl;
};

/**
 * Iterate k of the scheme. `Mbar` is the averaged density at iterate k and
 * Gamma, Phi, Psi, M, U are the best response to it: Gamma = f(Mbar),
 * Phi/Psi from the two sweeps, M = Phi Psi, U = -2 nu log Phi.
 */
struct GcgState {
  explicit GcgState(const GridSpec& grid)
      : Mbar(grid), Gamma(grid), Phi(grid), Psi(grid), M(grid), U(grid) {}

  long k = 0;
  GridFunction Mbar;
  GridFunction Gamma;
  GridFunction Phi;
  GridFunction Psi;
  GridFunction M;
  GridFunction U;
  bool has_value = false;
  DmpDiagnostics dmp;
};

/// Gamma_{n,i} = f(t_n, x_i, Mbar_n, i). Throws CouplingRangeError outside [0, C0].
GridFunction eval_gamma(const ProblemSpec& problem, const GridSpec& grid, const GridFunction& Mbar);

/// Backward sweep from Phi_{N_t} = exp(-g / 2nu). Throws CflViolation before
/// running, DmpBreach if Phi leaves the DMP bounds beyond 1e-10 relative slack.
GridFunction backward_phi_sweep(const ProblemSpec& problem, const GridSpec& grid,
                                const AdvectionSamples& adv, const GridFunction& Gamma);

/// Forward sweep from Psi_0 = m0 / Phi_0. Throws DmpBreach if Psi < -1e-12.
GridFunction forward_psi_sweep(const ProblemSpec& problem, const GridSpec& grid,
                               const AdvectionSamples& adv, const GridFunction& Gamma,
                               std::span<const double> phi_level0);

GridFunction density_product(const GridFunction& Phi, const GridFunction& Psi);

/// U = -2 nu log Phi; throws DmpBreach on a nonpositive entry.
GridFunction value_from_phi(const GridFunction& Phi, double nu);

/// Scalars recorded for every iterate.
struct IterationRecord {
  long k = 0;
  /// Step size that produced this iterate (NaN for k = 0).
  double delta = 0.0;
  /// I(Mbar^k, Mbar^{k-1}) (NaN for k = 0).
  double successive_i = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double psi_min = 0.0;
  double psi_max = 0.0;
};

/**
 * Holds the problem tables shared by every iteration of one run and performs
 * the in-place best response / convex update cycle.
 */
class GcgSolver {
 public:
  GcgSolver(ProblemSpec problem, const GridSpec& grid, StepSchedule schedule);

  const GridSpec& grid() const noexcept { return grid_; }
  const ProblemSpec& problem() const noexcept { return problem_; }
  const AdvectionSamples& advection() const noexcept { return adv_; }
  const DmpBounds& bounds() const noexcept { return bounds_; }

  /// Iterate 0: Mbar = guess plus its best response.
  GcgState start(const GridFunction& guess) const;
  /// Mbar^{k+1} = (1 - delta_k) Mbar^k + delta_k M^k, then the new best response.
  /// Returns I(Mbar^{k+1}, Mbar^k).
  double advance(GcgState& state) const;
  /// Recomputes Gamma, Phi, Psi, M (and U if `with_value`) from state.Mbar.
  void respond(GcgState& state, bool with_value) const;
  /// U = -2 nu log Phi for the current response.
  void compute_value(GcgState& state) const;

  IterationRecord record(const GcgState& state, double delta, double successive_i) const;

 private:
  ProblemSpec problem_;
  GridSpec grid_;
  StepSchedule schedule_;
  AdvectionSamples adv_;
  CflReport cfl_;
  NodeCoordinates coords_;
  std::vector<double> phi_terminal_;
  std::vector<double> m0_;
  DmpBounds bounds_;
};

/// One full iteration on a copy of `state`.
GcgState gcg_step(const ProblemSpec& problem, const GridSpec& grid, const AdvectionSamples& adv,
                  const GcgState& state, const StepSchedule& schedule);

enum class StopReason { iteration_cap, plateau };
std::string_view to_string(StopReason reason);

struct RunOptions {
  /// Stop once I(Mbar^{k+1}, Mbar^k) < plateau_tol; 0 disables the detector.
  double plateau_tol = 0.0;
  /// Refresh U at every iterate, not only the final one.
  bool value_every_iteration = false;
  /// Called with iterate 0 and after every step.
  std::function<void(const GcgState&)> observer;
};

struct RunResult {
  explicit RunResult(const GridSpec& grid) : final(grid) {}
  GcgState final;
  std::vector<IterationRecord> history;
  StopReason stop = StopReason::iteration_cap;
};

/// Up to K steps from Mbar^0 = guess. The final state always carries U.
RunResult run_gcg(const ProblemSpec& problem, const GridSpec& grid, const StepSchedule& schedule,
                  long K, const GridFunction& guess, const RunOptions& options = {});

}  // namespace mfg
