#include "mfg/initial_guess.hpp"

#include <algorithm>

#include "mfg/errors.hpp"
#include "mfg/operators.hpp"
#include "mfg/sweeps.hpp"

namespace mfg {

InitialGuessMode parse_initial_guess_mode(std::string_view s) {
  if (s == "uncontrolled") return InitialGuessMode::uncontrolled;
  if (s == "zero-drift") return InitialGuessMode::zero_drift;
  throw ConfigError("unknown initial guess mode '" + std::string(s) +
                    "' (expected uncontrolled or zero-drift)");
}

std::string_view to_string(InitialGuessMode mode) {
  return mode == InitialGuessMode::uncontrolled ? "uncontrolled" : "zero-drift";
}

GridFunction fp_initial_guess(const ProblemSpec& problem, const GridSpec& grid, const VectorFn& drift) {
  problem.validate();
  const AdvectionSamples adv(grid, drift);
  require_cfl(grid, problem.nu, adv, "initial guess");

  GridFunction out(grid);
  const auto m0 = sample_initial_density(problem, grid);
  std::copy(m0.begin(), m0.end(), out.level(0).begin());
  for (int n = 0; n < grid.nt(); ++n) {
    forward_level(grid, problem.nu, adv, n, out.level(n), {}, out.level(n + 1));
  }
  return out;
}

GridFunction fp_initial_guess(const ProblemSpec& problem, const GridSpec& grid, InitialGuessMode mode) {
  if (mode == InitialGuessMode::uncontrolled) return fp_initial_guess(problem, grid, problem.advection);
  const VectorFn zero = [](double, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  return fp_initial_guess(problem, grid, zero);
}

}  // namespace mfg
