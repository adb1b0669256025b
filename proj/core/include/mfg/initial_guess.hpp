#pragma once

#include <string_view>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"

namespace mfg {

/// Drift used by the initial Fokker-Planck solve.
enum class InitialGuessMode {
  uncontrolled,  ///< drift = the problem's own advection h
  zero_drift,    ///< drift = 0 (pure heat flow of m0)
};

InitialGuessMode parse_initial_guess_mode(std::string_view s);
std::string_view to_string(InitialGuessMode mode);

/**
 * Starting density for the GCG iteration: level 0 is m0 sampled on the grid,
 * later levels follow the explicit upwind Fokker-Planck step
 *   M_{n+1} = M_n + dt (nu D2 M_n - D12 M_n)
 * with `drift` in place of h and no coupling term.
 *
 * Throws CflViolation if the grid is not CFL-stable for `drift`, ConfigError
 * if m0 is negative somewhere.
 */
GridFunction fp_initial_guess(const ProblemSpec& problem, const GridSpec& grid, const VectorFn& drift);
GridFunction fp_initial_guess(const ProblemSpec& problem, const GridSpec& grid, InitialGuessMode mode);

}  // namespace mfg
