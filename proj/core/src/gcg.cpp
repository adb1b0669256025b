#include "mfg/gcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfg/errors.hpp"
#include "mfg/sweeps.hpp"

namespace mfg {

namespace {

constexpr double kPhiRelativeSlack = 1e-10;
constexpr double kPsiAbsoluteSlack = 1e-12;

std::string node_name(int n, std::size_t i) {
  std::ostringstream s;
  s << "(n=" << n << ", i=" << i << ")";
  return s.str();
}

std::vector<double> terminal_phi(const ProblemSpec& problem, const GridSpec& grid) {
  auto g = sample_space(grid, problem.terminal);
  for (auto& v : g) v = std::exp(-v / (2.0 * problem.nu));
  return g;
}

DmpBounds bounds_from_terminal(const ProblemSpec& problem, std::span<const double> phi_terminal) {
  const auto [lo, hi] = std::minmax_element(phi_terminal.begin(), phi_terminal.end());
  return {std::exp(-problem.coupling_bound * problem.T / (2.0 * problem.nu)) * *lo, *hi};
}

void gamma_into(const ProblemSpec& problem, const GridSpec& grid, const NodeCoordinates& xs,
                const GridFunction& Mbar, GridFunction& Gamma) {
  const double c0 = problem.coupling_bound;
  for (int n = 0; n <= grid.nt(); ++n) {
    const double t = grid.t(n);
    const auto m = Mbar.level(n);
    auto out = Gamma.level(n);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double v = problem.coupling.eval(t, xs[i], m, i);
      if (!(v >= 0.0 && v <= c0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "coupling value " << v << " outside [0, " << c0 << "] at " << node_name(n, i);
        throw CouplingRangeError(msg.str());
      }
      out[i] = v;
    }
  }
}

void phi_sweep_into(const ProblemSpec& problem, const GridSpec& grid, const AdvectionSamples& adv,
                    std::span<const double> phi_terminal, const DmpBounds& bounds,
                    const GridFunction& Gamma, GridFunction& Phi) {
  std::copy(phi_terminal.begin(), phi_terminal.end(), Phi.level(grid.nt()).begin());
  const double lo = bounds.phi_lower * (1.0 - kPhiRelativeSlack);
  const double hi = bounds.phi_upper * (1.0 + kPhiRelativeSlack);
  for (int n = grid.nt(); n >= 1; --n) {
    auto out = Phi.level(n - 1);
    backward_level(grid, problem.nu, adv, n, Phi.level(n), Gamma.level(n), out);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] >= lo && out[i] <= hi)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "discrete maximum principle breached: Phi = " << out[i] << " outside ["
            << bounds.phi_lower << ", " << bounds.phi_upper << "] at " << node_name(n - 1, i);
        throw DmpBreach(msg.str());
      }
    }
  }
}

void psi_sweep_into(const ProblemSpec& problem, const GridSpec& grid, const AdvectionSamples& adv,
                    std::span<const double> m0, const GridFunction& Gamma,
                    std::span<const double> phi0, GridFunction& Psi) {
  auto first = Psi.level(0);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (!(phi0[i] > 0.0)) throw DmpBreach("Psi sweep: Phi at level 0 is not positive at " + node_name(0, i));
    first[i] = m0[i] / phi0[i];
  }
  for (int n = 0; n < grid.nt(); ++n) {
    auto out = Psi.level(n + 1);
    forward_level(grid, problem.nu, adv, n, Psi.level(n), Gamma.level(n), out);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] >= -kPsiAbsoluteSlack)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "discrete maximum principle breached: Psi = " << out[i] << " < 0 at "
            << node_name(n + 1, i);
        throw DmpBreach(msg.str());
      }
    }
  }
}

void product_into(const GridFunction& Phi, const GridFunction& Psi, GridFunction& M) {
  const auto a = Phi.values();
  const auto b = Psi.values();
  auto out = M.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] * b[k];
}

void value_into(const GridFunction& Phi, double nu, GridFunction& U) {
  const auto p = Phi.values();
  auto out = U.values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(p[k] > 0.0)) throw DmpBreach("value reconstruction: nonpositive Phi entry");
    out[k] = -2.0 * nu * std::log(p[k]);
  }
}

ProblemSpec validated(ProblemSpec problem) {
  problem.validate();
  return problem;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": grid mismatch");
}

void validate_guess(const GridFunction& guess, const GridSpec& grid) {
  require_same_grid(guess.grid(), grid, "initial guess");
  const auto v = guess.values();
  bool nonzero = false;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("initial guess must be finite and nonnegative");
    nonzero = nonzero || x > 0.0;
  }
  if (!nonzero) throw ConfigError("initial guess must not vanish identically");
}

// Mbar <- (1 - delta) Mbar + delta M; returns I(Mbar_new, Mbar_old).
double convex_update(const GridSpec& grid, double delta, const GridFunction& M, GridFunction& Mbar) {
  double sum = 0.0;
  for (int n = 0; n <= grid.nt(); ++n) {
    const auto m = M.level(n);
    auto mb = Mbar.level(n);
    double level_max = 0.0;
    for (std::size_t i = 0; i < mb.size(); ++i) {
      const double next = (1.0 - delta) * mb[i] + delta * m[i];
      level_max = std::max(level_max, std::abs(next - mb[i]));
      mb[i] = next;
    }
    if (n < grid.nt()) sum += level_max * level_max * grid.dt();
  }
  return std::sqrt(sum);
}

void fill_diagnostics(GcgState& state, const CflReport& cfl) {
  state.dmp.phi_min_observed = state.Phi.min();
  state.dmp.phi_max_observed = state.Phi.max();
  state.dmp.psi_min_observed = state.Psi.min();
  state.dmp.psi_max_observed = state.Psi.max();
  state.dmp.cfl = cfl;
}

}  // namespace

StepSchedule StepSchedule::predefined(double k1, double k2) {
  if (!(k2 >= 1.0 && k2 <= k1)) {
    throw ConfigError("step schedule: require 1 <= k2 <= k1");
  }
  return {k1, k2};
}

double step_size(const StepSchedule& schedule, long k) {
  if (k < 0) throw ConfigError("step size: k must be >= 0");
  return schedule.step_size(k);
}

DmpBounds dmp_bounds(const ProblemSpec& problem, const GridSpec& grid) {
  const auto phi_t = terminal_phi(problem, grid);
  return bounds_from_terminal(problem, phi_t);
}

GridFunction eval_gamma(const ProblemSpec& problem, const GridSpec& grid, const GridFunction& Mbar) {
  require_same_grid(Mbar.grid(), grid, "eval_gamma");
  GridFunction Gamma(grid);
  gamma_into(problem, grid, NodeCoordinates(grid), Mbar, Gamma);
  return Gamma;
}

GridFunction backward_phi_sweep(const ProblemSpec& problem, const GridSpec& grid,
                                const AdvectionSamples& adv, const GridFunction& Gamma) {
  require_cfl(grid, problem.nu, adv, "Phi sweep");
  require_same_grid(Gamma.grid(), grid, "Phi sweep");
  const auto phi_t = terminal_phi(problem, grid);
  GridFunction Phi(grid);
  phi_sweep_into(problem, grid, adv, phi_t, bounds_from_terminal(problem, phi_t), Gamma, Phi);
  return Phi;
}

GridFunction forward_psi_sweep(const ProblemSpec& problem, const GridSpec& grid,
                               const AdvectionSamples& adv, const GridFunction& Gamma,
                               std::span<const double> phi_level0) {
  require_cfl(grid, problem.nu, adv, "Psi sweep");
  require_same_grid(Gamma.grid(), grid, "Psi sweep");
  const auto m0 = sample_initial_density(problem, grid);
  GridFunction Psi(grid);
  psi_sweep_into(problem, grid, adv, m0, Gamma, phi_level0, Psi);
  return Psi;
}

GridFunction density_product(const GridFunction& Phi, const GridFunction& Psi) {
  require_same_grid(Phi.grid(), Psi.grid(), "density product");
  GridFunction M(Phi.grid());
  product_into(Phi, Psi, M);
  return M;
}

GridFunction value_from_phi(const GridFunction& Phi, double nu) {
  GridFunction U(Phi.grid());
  value_into(Phi, nu, U);
  return U;
}

GcgSolver::GcgSolver(ProblemSpec problem, const GridSpec& grid, StepSchedule schedule)
    : problem_(validated(std::move(problem))),
      grid_(grid),
      schedule_(schedule),
      adv_(grid, problem_.advection),
      coords_(grid) {
  if (problem_.d != grid.dim()) throw ConfigError("solver: problem and grid dimensions differ");
  if (std::abs(problem_.T - grid.horizon()) > 1e-12 * problem_.T) {
    throw ConfigError("solver: grid horizon differs from the problem horizon");
  }
  StepSchedule::predefined(schedule_.k1, schedule_.k2);
  cfl_ = require_cfl(grid_, problem_.nu, adv_, "GCG solver");
  phi_terminal_ = terminal_phi(problem_, grid_);
  m0_ = sample_initial_density(problem_, grid_);
  bounds_ = bounds_from_terminal(problem_, phi_terminal_);
}

void GcgSolver::respond(GcgState& state, bool with_value) const {
  gamma_into(problem_, grid_, coords_, state.Mbar, state.Gamma);
  phi_sweep_into(problem_, grid_, adv_, phi_terminal_, bounds_, state.Gamma, state.Phi);
  psi_sweep_into(problem_, grid_, adv_, m0_, state.Gamma, state.Phi.level(0), state.Psi);
  product_into(state.Phi, state.Psi, state.M);
  state.has_value = with_value;
  if (with_value) value_into(state.Phi, problem_.nu, state.U);
  fill_diagnostics(state, cfl_);
}

void GcgSolver::compute_value(GcgState& state) const {
  value_into(state.Phi, problem_.nu, state.U);
  state.has_value = true;
}

GcgState GcgSolver::start(const GridFunction& guess) const {
  validate_guess(guess, grid_);
  GcgState state(grid_);
  state.k = 0;
  state.Mbar = guess;
  respond(state, false);
  return state;
}

double GcgSolver::advance(GcgState& state) const {
  const double delta = schedule_.step_size(state.k);
  const double moved = convex_update(grid_, delta, state.M, state.Mbar);
  ++state.k;
  respond(state, false);
  return moved;
}

IterationRecord GcgSolver::record(const GcgState& state, double delta, double successive_i) const {
  return {state.k,
          delta,
          successive_i,
          state.dmp.phi_min_observed,
          state.dmp.phi_max_observed,
          state.dmp.psi_min_observed,
          state.dmp.psi_max_observed};
}

GcgState gcg_step(const ProblemSpec& problem, const GridSpec& grid, const AdvectionSamples& adv,
                  const GcgState& state, const StepSchedule& schedule) {
  const CflReport cfl = require_cfl(grid, problem.nu, adv, "GCG step");
  GcgState next = state;
  convex_update(grid, step_size(schedule, state.k), state.M, next.Mbar);
  ++next.k;

  const NodeCoordinates xs(grid);
  const auto phi_t = terminal_phi(problem, grid);
  const auto m0 = sample_initial_density(problem, grid);
  gamma_into(problem, grid, xs, next.Mbar, next.Gamma);
  phi_sweep_into(problem, grid, adv, phi_t, bounds_from_terminal(problem, phi_t), next.Gamma, next.Phi);
  psi_sweep_into(problem, grid, adv, m0, next.Gamma, next.Phi.level(0), next.Psi);
  product_into(next.Phi, next.Psi, next.M);
  value_into(next.Phi, problem.nu, next.U);
  next.has_value = true;
  fill_diagnostics(next, cfl);
  return next;
}

std::string_view to_string(StopReason reason) {
  return reason == StopReason::plateau ? "plateau" : "iteration_cap";
}

RunResult run_gcg(const ProblemSpec& problem, const GridSpec& grid, const StepSchedule& schedule,
                  long K, const GridFunction& guess, const RunOptions& options) {
  if (K < 0) throw ConfigError("run_gcg: iteration count must be >= 0");
  const GcgSolver solver(problem, grid, schedule);
  RunResult result(grid);
  result.final = solver.start(guess);
  GcgState& state = result.final;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  result.history.reserve(static_cast<std::size_t>(K) + 1);
  if (options.value_every_iteration) solver.compute_value(state);
  result.history.push_back(solver.record(state, nan, nan));
  if (options.observer) options.observer(state);

  while (state.k < K) {
    const double delta = schedule.step_size(state.k);
    const double moved = solver.advance(state);
    if (options.value_every_iteration) solver.compute_value(state);
    result.history.push_back(solver.record(state, delta, moved));
    if (options.observer) options.observer(state);
    if (options.plateau_tol > 0.0 && moved < options.plateau_tol) {
      result.stop = StopReason::plateau;
      break;
    }
  }
  if (!state.has_value) solver.compute_value(state);
  return result;
}

}  // namespace mfg
