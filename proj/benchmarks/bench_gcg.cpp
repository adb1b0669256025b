#include <benchmark/benchmark.h>

#include <cmath>

#include "mfg/gcg.hpp"
#include "mfg/initial_guess.hpp"

using namespace mfg;

namespace {

// 1D: N_x = arg, N_t from 2 nu dt / dx^2 = 1/2. 2D: fixed desk grid.
GridSpec grid_for(const ProblemSpec& p, int nx) {
  const double dx = 1.0 / nx;
  const int nt = static_cast<int>(std::ceil(2.0 * p.d * p.nu * p.T / (0.5 * dx * dx)));
  return make_grid(p.d, p.T, nt, nx);
}

ProblemSpec problem_for(int d) { return d == 1 ? example_1d_advection() : example_2d(); }

void BM_EvalGamma(benchmark::State& st) {
  const auto p = problem_for(static_cast<int>(st.range(0)));
  const auto g = grid_for(p, static_cast<int>(st.range(1)));
  const auto mbar = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  for (auto _ : st) benchmark::DoNotOptimize(eval_gamma(p, g, mbar));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

void BM_BackwardSweep(benchmark::State& st) {
  const auto p = problem_for(static_cast<int>(st.range(0)));
  const auto g = grid_for(p, static_cast<int>(st.range(1)));
  const AdvectionSamples adv(g, p.advection);
  const auto gamma = eval_gamma(p, g, fp_initial_guess(p, g, InitialGuessMode::uncontrolled));
  for (auto _ : st) benchmark::DoNotOptimize(backward_phi_sweep(p, g, adv, gamma));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

void BM_ForwardSweep(benchmark::State& st) {
  const auto p = problem_for(static_cast<int>(st.range(0)));
  const auto g = grid_for(p, static_cast<int>(st.range(1)));
  const AdvectionSamples adv(g, p.advection);
  const auto gamma = eval_gamma(p, g, fp_initial_guess(p, g, InitialGuessMode::uncontrolled));
  const auto phi = backward_phi_sweep(p, g, adv, gamma);
  for (auto _ : st) benchmark::DoNotOptimize(forward_psi_sweep(p, g, adv, gamma, phi.level(0)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

void BM_FullIteration(benchmark::State& st) {
  const auto p = problem_for(static_cast<int>(st.range(0)));
  const auto g = grid_for(p, static_cast<int>(st.range(1)));
  const GcgSolver solver(p, g, StepSchedule::predefined(2, 2));
  auto state = solver.start(fp_initial_guess(p, g, InitialGuessMode::uncontrolled));
  for (auto _ : st) benchmark::DoNotOptimize(solver.advance(state));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(g.size()));
}

}  // namespace

BENCHMARK(BM_EvalGamma)->Args({1, 200})->Args({1, 500})->Args({2, 40})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackwardSweep)->Args({1, 200})->Args({1, 500})->Args({2, 40})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSweep)->Args({1, 200})->Args({1, 500})->Args({2, 40})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FullIteration)->Args({1, 200})->Args({1, 500})->Args({2, 40})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
