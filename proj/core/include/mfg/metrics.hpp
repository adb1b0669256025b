#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

// Error metrics between a grid function and a reference tabulated on the
// same grid. All three throw GridMismatch when the grids differ.

/// sqrt( sum_{n=0}^{N_t-1} (max_i |fn - ref|)^2 dt ); the terminal level is excluded.
double metric_I(const GridFunction& fn, const GridFunction& ref);
/// max over every (n, i), terminal level included.
double metric_E(const GridFunction& fn, const GridFunction& ref);
/// max_{n < N_t} sqrt( sum_i |fn - ref|^2 dx^d ).
double metric_I_tilde(const GridFunction& fn, const GridFunction& ref);

/// Same metrics against a closed-form reference sampled at the nodes of fn.
double metric_I(const GridFunction& fn, const SpaceTimeFn& ref);
double metric_E(const GridFunction& fn, const SpaceTimeFn& ref);
double metric_I_tilde(const GridFunction& fn, const SpaceTimeFn& ref);

struct Provenance {
  std::string problem;
  double k1 = 0.0;
  double k2 = 0.0;
  long iterations = 0;
  std::string stop_reason;
  /// Last successive-iterate I value.
  double plateau_value = 0.0;
  std::string initial_guess;
  std::string timestamp;
};

/// Fine-grid numerical solution standing in for the exact one.
struct ReferenceSolution {
  ReferenceSolution(GridFunction mbar, GridFunction u, Provenance prov = {})
      : Mbar(std::move(mbar)), U(std::move(u)), provenance(std::move(prov)) {}

  const GridSpec& grid() const noexcept { return Mbar.grid(); }

  GridFunction Mbar;
  GridFunction U;
  Provenance provenance;
};

/**
 * Value of a fine grid function at (t, x): multilinear in space with periodic
 * wrap; in time an exact level is used when t falls on one (up to rounding),
 * otherwise linear interpolation between the two adjacent levels.
 */
double interpolate_reference(const GridFunction& ref, double t, std::span<const double> x);

/// Evaluates `ref` at every node of `coarse` (same horizon required).
/// Nested grids reduce to exact node picks.
GridFunction tabulate_reference(const GridFunction& ref, const GridSpec& coarse);

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// OLS of log(err) on log(h). Throws ConfigError on < 2 points,
/// nonpositive values or all-equal h.
RegressionFit fit_loglog(std::span<const std::pair<double, double>> points);

/// OLS of log(err) on log(k + k1); the slope estimates the iteration order.
RegressionFit fit_iteration_order(std::span<const std::pair<long, double>> points, double k1);

}  // namespace mfg
