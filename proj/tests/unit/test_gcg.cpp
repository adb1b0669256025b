#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "mfg/errors.hpp"
#include "mfg/gcg.hpp"
#include "mfg/initial_guess.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

// Dense matrix of a linear stencil on N nodes, built column by column.
template <class Op>
std::vector<double> stencil_matrix(std::size_t nodes, Op op) {
  std::vector<double> a(nodes * nodes);
  for (std::size_t c = 0; c < nodes; ++c) {
    std::vector<double> e(nodes, 0.0);
    e[c] = 1.0;
    const auto col = op(e);
    for (std::size_t r = 0; r < nodes; ++r) a[r * nodes + c] = col[r];
  }
  return a;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

ProblemSpec with_constant_coupling(ProblemSpec p, double c) {
  p.coupling.eval = [c](double, std::span<const double>, std::span<const double>, std::size_t) { return c; };
  p.coupling_bound = c;
  return p;
}

}  // namespace

TEST_CASE("step sizes") {
  CHECK(step_size(StepSchedule::fictitious_play(), 0) == 1.0);
  CHECK(step_size(StepSchedule::predefined(10, 10), 90) == 0.1);
  CHECK(step_size(StepSchedule::predefined(3, 2), 7) == 0.2);
  for (long k = 0; k < 100; ++k) {
    const double d = step_size(StepSchedule::predefined(3, 2), k);
    CHECK(d > 0.0);
    CHECK(d <= 1.0);
  }
  CHECK_THROWS_AS(StepSchedule::predefined(1, 2), ConfigError);
  CHECK_THROWS_AS(StepSchedule::predefined(0.5, 0.5), ConfigError);
  CHECK_THROWS_AS(step_size(StepSchedule::fictitious_play(), -1), ConfigError);
}

TEST_CASE("eval_gamma examples") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 4, 10);
  const auto g0 = eval_gamma(p, g, GridFunction(g, 0.0));
  const auto g7 = eval_gamma(p, g, GridFunction(g, 7.0));
  for (int n = 0; n <= g.nt(); ++n) {
    for (int i = 0; i < 10; ++i) {
      const double z = i * g.dx() - 0.5;
      CHECK(g0(n, i) == doctest::Approx(z * z).epsilon(1e-15));
      CHECK(g7(n, i) == doctest::Approx(z * z + 20.0).epsilon(1e-15));
    }
  }
  const auto pc = with_constant_coupling(p, 3.0);
  for (double v : eval_gamma(pc, g, GridFunction(g, 123.0)).values()) CHECK(v == 3.0);

  auto bad = p;
  bad.coupling_bound = 1.0;
  CHECK_THROWS_AS(eval_gamma(bad, g, GridFunction(g, 7.0)), CouplingRangeError);
  CHECK_THROWS_AS(eval_gamma(p, g, GridFunction(make_grid(1, p.T, 5, 10), 0.0)), GridMismatch);
}

TEST_CASE("Phi sweep on constants") {
  const auto g = make_grid(1, 0.1, 20, 8);
  const auto zero_g = fixture::tabulated_problem(g, 0.01, std::vector<double>(8, 0.0), std::vector<double>(8, 1.0), 0.0);
  const auto adv = AdvectionSamples::zero(g);
  for (double v : backward_phi_sweep(zero_g, g, adv, GridFunction(g, 0.0)).values()) CHECK(v == 1.0);

  const double c = 2.0;
  const auto pc = fixture::tabulated_problem(g, 0.01, std::vector<double>(8, 0.0), std::vector<double>(8, 1.0), c);
  const auto phi = backward_phi_sweep(pc, g, adv, GridFunction(g, c));
  const double r = 1.0 + g.dt() * c / (2 * 0.01);
  for (int n = 0; n <= g.nt(); ++n) {
    for (int i = 0; i < 8; ++i) CHECK(phi(n, i) == doctest::Approx(std::pow(r, -(g.nt() - n))).epsilon(1e-13));
  }
}

TEST_CASE("Phi sweep matches a dense solve of the recurrence") {
  std::mt19937_64 rng(31);
  const int nx = 4;
  const auto g = make_grid(1, 0.2, 2, nx);
  const double nu = 0.01;
  for (int trial = 0; trial < 10; ++trial) {
    const auto terminal = oracle::random_vector(rng, nx, -0.01, 0.01);
    const auto htable = oracle::random_vector(rng, nx, -1.0, 1.0);
    const double c0 = 3.0;
    const auto p = fixture::tabulated_problem(g, nu, terminal, std::vector<double>(nx, 1.0), c0,
                                              fixture::table_field(g, htable));
    const AdvectionSamples adv(g, p.advection);
    GridFunction gamma(g, oracle::random_vector(rng, g.size(), 0.0, c0));
    const auto phi = backward_phi_sweep(p, g, adv, gamma);

    // Level-by-level: diag(1 + dt Gamma_n / 2nu) Phi_{n-1} = (I + dt (nu L + H)) Phi_n.
    const auto lap = stencil_matrix(nx, [&](const std::vector<double>& v) { return oracle::laplacian(v, 1, nx); });
    const auto adv_m =
        stencil_matrix(nx, [&](const std::vector<double>& v) { return oracle::upwind_gradient(v, htable, 1, nx); });
    std::vector<double> cur(nx);
    for (int i = 0; i < nx; ++i) cur[i] = std::exp(-terminal[i] / (2 * nu));
    CHECK(max_diff(phi.level(g.nt()), cur) <= 1e-15);
    for (int n = g.nt(); n >= 1; --n) {
      std::vector<double> a(nx * nx, 0.0), rhs(nx, 0.0);
      for (int r = 0; r < nx; ++r) {
        a[r * nx + r] = 1.0 + g.dt() * gamma(n, r) / (2 * nu);
        for (int c = 0; c < nx; ++c) {
          const double op = (r == c ? 1.0 : 0.0) + g.dt() * (nu * lap[r * nx + c] + adv_m[r * nx + c]);
          rhs[r] += op * cur[c];
        }
      }
      cur = oracle::dense_solve(a, rhs);
      CHECK(max_diff(phi.level(n - 1), cur) <= 1e-14);
    }
  }
}

TEST_CASE("Psi sweep examples") {
  const auto g = make_grid(1, 0.1, 20, 8);
  const auto adv = AdvectionSamples::zero(g);
  const std::vector<double> zeros(8, 0.0), ones(8, 1.0);

  const auto empty = fixture::tabulated_problem(g, 0.01, zeros, zeros, 0.0);
  for (double v : forward_psi_sweep(empty, g, adv, GridFunction(g, 0.0), ones).values()) CHECK(v == 0.0);

  const auto flat = fixture::tabulated_problem(g, 0.01, zeros, ones, 0.0);
  for (double v : forward_psi_sweep(flat, g, adv, GridFunction(g, 0.0), ones).values()) CHECK(v == 1.0);

  const double c = 5.0;
  const auto pc = fixture::tabulated_problem(g, 0.01, zeros, ones, c);
  const GridFunction gamma(g, c);
  const auto phi = backward_phi_sweep(pc, g, adv, gamma);
  const auto psi = forward_psi_sweep(pc, g, adv, gamma, phi.level(0));
  const auto m = density_product(phi, psi);
  for (double v : m.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density product and value reconstruction") {
  std::mt19937_64 rng(41);
  const auto g = make_grid(1, 0.1, 3, 5);
  const GridFunction psi(g, oracle::random_vector(rng, g.size(), 0.1, 2.0));
  const GridFunction phi(g, oracle::random_vector(rng, g.size(), 0.1, 2.0));
  const auto id = density_product(GridFunction(g, 1.0), psi);
  CHECK(max_diff(id.values(), psi.values()) == 0.0);
  for (double v : density_product(phi, GridFunction(g, 0.0)).values()) CHECK(v == 0.0);
  for (double v : density_product(phi, psi).values()) CHECK(v > 0.0);

  for (double v : value_from_phi(GridFunction(g, 1.0), 0.01).values()) CHECK(v == 0.0);
  CHECK(value_from_phi(GridFunction(g, std::exp(1.0)), 0.01)(1, 1) == doctest::Approx(-0.02).epsilon(1e-15));
  GridFunction bad(g, 1.0);
  bad(2, 3) = 0.0;
  CHECK_THROWS_AS(value_from_phi(bad, 0.01), DmpBreach);
}

TEST_CASE("terminal value recovers g") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 100, 50);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  const auto run = run_gcg(p, g, StepSchedule::fictitious_play(), 0, guess);
  const auto gt = sample_space(g, p.terminal);
  CHECK(max_diff(run.final.U.level(g.nt()), gt) <= 1e-15);
}

TEST_CASE("gcg_step takes the full step at k = 0") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 100, 50);
  const GcgSolver solver(p, g, StepSchedule::fictitious_play());
  const auto s0 = solver.start(fp_initial_guess(p, g, InitialGuessMode::uncontrolled));
  const auto s1 = gcg_step(p, g, solver.advection(), s0, StepSchedule::fictitious_play());
  CHECK(s1.k == 1);
  CHECK(max_diff(s1.Mbar.values(), s0.M.values()) == 0.0);
  CHECK(s1.has_value);

  // gcg_step and the in-place solver agree bitwise.
  auto inplace = s0;
  solver.advance(inplace);
  CHECK(max_diff(inplace.Mbar.values(), s1.Mbar.values()) == 0.0);
  CHECK(max_diff(inplace.M.values(), s1.M.values()) == 0.0);
}

TEST_CASE("constant coupling contracts towards M0") {
  const auto p = with_constant_coupling(example_1d(), 3.0);
  const auto g = make_grid(1, p.T, 100, 50);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::zero_drift);
  const GcgSolver solver(p, g, StepSchedule::predefined(2, 1));
  auto state = solver.start(guess);
  const GridFunction m0 = state.M;
  double prev = max_diff(state.Mbar.values(), m0.values());
  CHECK(prev > 0.0);
  const double initial = prev;
  for (long k = 0; k < 50; ++k) {
    const double delta = step_size(StepSchedule::predefined(2, 1), k);
    solver.advance(state);
    CHECK(max_diff(state.M.values(), m0.values()) == 0.0);
    const double now = max_diff(state.Mbar.values(), m0.values());
    CHECK(now == doctest::Approx((1.0 - delta) * prev).epsilon(1e-9));
    prev = now;
  }
  CHECK(prev <= initial / 50.0);

  const auto fp = run_gcg(p, g, StepSchedule::fictitious_play(), 50, guess);
  CHECK(max_diff(fp.final.Mbar.values(), m0.values()) <= initial / 50.0);
}

TEST_CASE("fictitious play averages the best responses") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 160, 40);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  std::vector<double> sum(g.size(), 0.0);
  long count = 0;
  RunOptions opts;
  opts.observer = [&](const GcgState& s) {
    if (s.k >= 50) return;
    for (std::size_t q = 0; q < sum.size(); ++q) sum[q] += s.M.values()[q];
    ++count;
  };
  const auto run = run_gcg(p, g, StepSchedule::fictitious_play(), 50, guess, opts);
  CHECK(count == 50);
  double worst = 0.0;
  for (std::size_t q = 0; q < sum.size(); ++q) {
    const double mean = sum[q] / 50.0;
    worst = std::max(worst, std::abs(run.final.Mbar.values()[q] - mean) / std::max(std::abs(mean), 1e-300));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("K = 0 returns the guess") {
  const auto p = example_2d();
  const auto g = make_grid(2, p.T, 64, 20);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  const auto run = run_gcg(p, g, StepSchedule::fictitious_play(), 0, guess);
  CHECK(run.final.k == 0);
  CHECK(max_diff(run.final.Mbar.values(), guess.values()) == 0.0);
  CHECK(run.history.size() == 1);
  CHECK(std::isnan(run.history[0].successive_i));
  CHECK(run.final.has_value);
}

TEST_CASE("convex update stays between the iterate and the response") {
  const auto p = example_1d_advection();
  const auto g = make_grid(1, p.T, 200, 40);
  const GcgSolver solver(p, g, StepSchedule::predefined(3, 2));
  auto state = solver.start(fp_initial_guess(p, g, InitialGuessMode::uncontrolled));
  for (int k = 0; k < 20; ++k) {
    const GridFunction before = state.Mbar;
    const GridFunction response = state.M;
    solver.advance(state);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double lo = std::min(before.values()[q], response.values()[q]);
      const double hi = std::max(before.values()[q], response.values()[q]);
      CHECK(state.Mbar.values()[q] >= lo * (1 - 1e-15));
      CHECK(state.Mbar.values()[q] <= hi * (1 + 1e-15));
    }
  }
}

TEST_CASE("runs are deterministic") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 160, 40);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  const auto a = run_gcg(p, g, StepSchedule::predefined(2, 2), 30, guess);
  const auto b = run_gcg(p, g, StepSchedule::predefined(2, 2), 30, guess);
  CHECK(std::memcmp(a.final.Mbar.values().data(), b.final.Mbar.values().data(), g.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(a.final.U.values().data(), b.final.U.values().data(), g.size() * sizeof(double)) == 0);
}

TEST_CASE("plateau detector stops the run") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 100, 50);
  const auto guess = fp_initial_guess(p, g, InitialGuessMode::uncontrolled);
  RunOptions opts;
  opts.plateau_tol = 1e-6;
  const auto run = run_gcg(p, g, StepSchedule::predefined(10, 10), 5000, guess, opts);
  CHECK(run.stop == StopReason::plateau);
  CHECK(run.final.k < 5000);
  CHECK(run.history.back().successive_i < 1e-6);
  CHECK(run.history[run.history.size() - 2].successive_i >= 1e-6);
}

TEST_CASE("DMP holds on random CFL-stable problems") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 1 + trial % 2;
    const int nx = d == 1 ? 16 : 6;
    const auto g = make_grid(d, 0.1, d == 1 ? 60 : 10, nx);
    auto p = example_1d();
    p.name = "random";
    p.d = d;
    const auto gtab = oracle::random_vector(rng, g.nodes(), -0.05, 0.05);
    const auto mtab = oracle::random_vector(rng, g.nodes(), 0.0, 3.0);
    // Positivity of the forward sweep needs h of one sign along each axis.
    auto htab = oracle::random_vector(rng, g.nodes() * d, 0.05, 0.5);
    for (std::size_t q = 0; q < htab.size(); ++q) {
      if ((trial / 2 + static_cast<int>(q % d)) % 2) htab[q] = -htab[q];
    }
    p.terminal = [g, gtab](std::span<const double> x) { return gtab[fixture::node_of(g, x)]; };
    p.initial_density = [g, mtab](std::span<const double> x) { return mtab[fixture::node_of(g, x)]; };
    p.advection = fixture::table_field(g, htab);
    p.coupling.eval = [](double, std::span<const double> x, std::span<const double> m, std::size_t i) {
      return 10.0 * x[0] + std::min(m[i], 4.0);
    };
    p.coupling_bound = 14.0;

    const GcgSolver solver(p, g, StepSchedule::fictitious_play());
    const auto b = solver.bounds();
    auto state = solver.start(GridFunction(g, 1.0));
    for (int k = 0; k <= 15; ++k) {
      CHECK(state.Phi.min() >= b.phi_lower - 1e-10);
      CHECK(state.Phi.max() <= b.phi_upper + 1e-10);
      CHECK(state.Psi.min() >= -1e-12);
      for (int n = 0; n <= g.nt(); ++n) {
        for (std::size_t i = 0; i < g.nodes(); ++i) CHECK(1.0 + g.dt() * state.Gamma(n, i) / (2 * p.nu) >= 1.0);
      }
      solver.advance(state);
    }
  }
}

TEST_CASE("solver input validation") {
  const auto p = example_1d();
  const auto g = make_grid(1, p.T, 100, 50);
  CHECK_THROWS_AS(GcgSolver(p, make_grid(1, p.T, 10, 500), StepSchedule::fictitious_play()), CflViolation);
  CHECK_THROWS_AS(GcgSolver(p, make_grid(2, p.T, 100, 10), StepSchedule::fictitious_play()), ConfigError);
  CHECK_THROWS_AS(GcgSolver(p, make_grid(1, 1.0, 1000, 50), StepSchedule::fictitious_play()), ConfigError);
  CHECK_THROWS_AS(GcgSolver(p, g, StepSchedule{1.0, 2.0}), ConfigError);
  const GcgSolver solver(p, g, StepSchedule::fictitious_play());
  CHECK_THROWS_AS(solver.start(GridFunction(g, 0.0)), ConfigError);
  GridFunction neg(g, 1.0);
  neg(3, 3) = -1e-3;
  CHECK_THROWS_AS(solver.start(neg), ConfigError);
  CHECK_THROWS_AS(solver.start(GridFunction(make_grid(1, p.T, 100, 25), 1.0)), GridMismatch);
  CHECK_THROWS_AS(run_gcg(p, g, StepSchedule::fictitious_play(), -1, GridFunction(g, 1.0)), ConfigError);
}

TEST_CASE("CFL violation message names the left-hand side") {
  const auto p = example_1d();
  try {
    GcgSolver(p, make_grid(1, p.T, 10, 500), StepSchedule::fictitious_play());
    FAIL("expected CflViolation");
  } catch (const CflViolation& e) {
    CHECK(e.lhs() == doctest::Approx(2 * 0.01 * 0.01 * 500 * 500).epsilon(1e-12));
    CHECK(std::string(e.what()).find("lhs") != std::string::npos);
  }
}
