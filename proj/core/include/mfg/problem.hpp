#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

enum class CouplingKind { local, global };

/**
 * Density coupling f(t, x, m).
 *
 * `eval` receives the whole density slice at the current time level and the
 * flat index of the node being evaluated. Local couplings read m_slice[i]
 * only; global couplings may read the full slice.
 */
struct CouplingTerm {
  using Eval = std::function<double(double t, std::span<const double> x,
                                    std::span<const double> m_slice, std::size_t i)>;
  CouplingKind kind = CouplingKind::local;
  Eval eval;
};

/// MFG instance with quadratic Hamiltonian H(t, x, p) = |p|^2/2 - h(t, x) . p.
struct ProblemSpec {
  std::string name;
  int d = 1;
  double nu = 0.0;
  double T = 0.0;
  VectorFn advection;
  CouplingTerm coupling;
  SpaceFn terminal;
  SpaceFn initial_density;
  /// Upper bound C0 with 0 <= f <= C0.
  double coupling_bound = 0.0;

  /// Throws ConfigError on nu <= 0, T <= 0 or a missing callable.
  void validate() const;
};

/// T = 0.1, nu = 0.01, h = 0, g = -cos(2 pi x)/(2 pi), Gaussian m0 (sigma 0.1),
/// f = (x - 1/2)^2 + 4 min(m, 5).
ProblemSpec example_1d();
/// example_1d with h = 1.
ProblemSpec example_1d_advection();
/// Two-dimensional analogue centred at (1/2, 1/2), sigma 0.25.
ProblemSpec example_2d();

/// "ex1d", "ex1d-adv" or "ex2d"; throws ConfigError otherwise.
ProblemSpec problem_by_name(std::string_view name);
std::vector<std::string> problem_names();

/// Samples m0 and rejects negative values.
std::vector<double> sample_initial_density(const ProblemSpec& problem, const GridSpec& grid);

}  // namespace mfg
