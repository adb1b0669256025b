#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "mfg/errors.hpp"
#include "mfg/operators.hpp"
#include "oracles.hpp"

using namespace mfg;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> flatten_field(const AdvectionSamples& adv, int n) {
  const auto& g = adv.grid();
  std::vector<double> h(g.nodes() * g.dim());
  for (int l = 0; l < g.dim(); ++l) {
    const auto c = adv.component(n, l);
    for (std::size_t i = 0; i < g.nodes(); ++i) h[i * g.dim() + l] = c[i];
  }
  return h;
}

}  // namespace

TEST_CASE("upwind_split examples") {
  auto s = upwind_split(std::vector<double>{-3.0});
  CHECK(s.plus == std::vector<double>{0.0});
  CHECK(s.minus == std::vector<double>{3.0});
  s = upwind_split(std::vector<double>{0.0});
  CHECK(s.plus == std::vector<double>{0.0});
  CHECK(s.minus == std::vector<double>{0.0});
  s = upwind_split(std::vector<double>{2.0, -5.0});
  CHECK(s.plus == std::vector<double>{2.0, 0.0});
  CHECK(s.minus == std::vector<double>{0.0, 5.0});
}

TEST_CASE("advection samples satisfy the split invariants") {
  std::mt19937_64 rng(11);
  const auto g = make_grid(2, 1.0, 3, 5);
  const auto table = oracle::random_vector(rng, g.nodes() * 2, -2.0, 2.0);
  const AdvectionSamples adv(g, fixture::table_field(g, table));
  double sup = 0.0;
  for (double v : table) sup = std::max(sup, std::abs(v));
  CHECK(adv.sup_norm() == sup);
  for (int n = 0; n <= g.nt(); ++n) {
    for (int l = 0; l < 2; ++l) {
      const auto h = adv.component(n, l), p = adv.plus(n, l), m = adv.minus(n, l);
      for (std::size_t i = 0; i < g.nodes(); ++i) {
        CHECK(p[i] >= 0.0);
        CHECK(m[i] >= 0.0);
        CHECK(p[i] - m[i] == h[i]);
        CHECK(p[i] * m[i] == 0.0);
        CHECK(h[i] == table[i * 2 + l]);
      }
    }
  }
}

TEST_CASE("D2 examples") {
  const auto g = make_grid(1, 1.0, 1, 4);
  for (double v : d2_laplacian(g, std::vector<double>(4, 3.5))) CHECK(v == 0.0);
  const auto alt = d2_laplacian(g, std::vector<double>{0, 1, 0, 1});
  const double expect[] = {32, -32, 32, -32};
  for (int i = 0; i < 4; ++i) CHECK(alt[i] == doctest::Approx(expect[i]).epsilon(1e-14));
}

TEST_CASE("D2 is second order on sin(2 pi x)") {
  std::vector<std::pair<double, double>> pts;
  for (int nx : {16, 32, 64}) {
    const auto g = make_grid(1, 1.0, 1, nx);
    const auto phi = sample_space(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
    const auto lap = d2_laplacian(g, phi);
    double err = 0.0;
    for (int i = 0; i < nx; ++i) err = std::max(err, std::abs(lap[i] + 4 * kPi * kPi * phi[i]));
    pts.emplace_back(g.dx(), err);
  }
  CHECK(std::abs(oracle::loglog_slope(pts) - 2.0) <= 0.1);
}

TEST_CASE("D11 is first order with h = 1 on a smooth subinterval") {
  std::vector<std::pair<double, double>> pts;
  for (int nx : {32, 64, 128}) {
    const auto g = make_grid(1, 1.0, 1, nx);
    const auto adv = AdvectionSamples(g, fixture::constant_field(1, 1.0));
    const auto phi = sample_space(g, [](std::span<const double> x) { return x[0] * (1.0 - x[0]); });
    const auto grad = d1_upwind_gradient(g, phi, adv, 0);
    double err = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double x = i * g.dx();
      if (x < 0.1 || x > 0.9) continue;
      err = std::max(err, std::abs(grad[i] - (1.0 - 2.0 * x)));
    }
    pts.emplace_back(g.dx(), err);
  }
  CHECK(std::abs(oracle::loglog_slope(pts) - 1.0) <= 0.15);
}

TEST_CASE("D12 is first order with h = 1 on a smooth function") {
  std::vector<std::pair<double, double>> pts;
  for (int nx : {32, 64, 128}) {
    const auto g = make_grid(1, 1.0, 1, nx);
    const auto adv = AdvectionSamples(g, fixture::constant_field(1, 1.0));
    const auto phi = sample_space(g, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
    const auto div = d1_upwind_divergence(g, phi, adv, 0);
    double err = 0.0;
    for (int i = 0; i < nx; ++i) err = std::max(err, std::abs(div[i] - 2 * kPi * std::cos(2 * kPi * i * g.dx())));
    pts.emplace_back(g.dx(), err);
  }
  CHECK(std::abs(oracle::loglog_slope(pts) - 1.0) <= 0.15);
}

TEST_CASE("advection stencils vanish on trivial inputs") {
  std::mt19937_64 rng(3);
  const auto g = make_grid(2, 1.0, 1, 6);
  const auto phi = oracle::random_vector(rng, g.nodes(), -1, 1);
  const auto zero = AdvectionSamples::zero(g);
  CHECK(zero.is_zero());
  CHECK(oracle::max_abs(d1_upwind_gradient(g, phi, zero, 0)) == 0.0);
  CHECK(oracle::max_abs(d1_upwind_divergence(g, phi, zero, 0)) == 0.0);

  const AdvectionSamples rand_h(g, fixture::table_field(g, oracle::random_vector(rng, g.nodes() * 2, -1, 1)));
  CHECK(oracle::max_abs(d1_upwind_gradient(g, std::vector<double>(g.nodes(), 2.0), rand_h, 0)) <= 1e-12);

  const AdvectionSamples const_h(g, fixture::constant_field(2, -0.7));
  CHECK(oracle::max_abs(d1_upwind_divergence(g, std::vector<double>(g.nodes(), 2.0), const_h, 0)) <= 1e-12);
}

TEST_CASE("D12 with h = 1 is the backward difference") {
  std::mt19937_64 rng(5);
  const auto g = make_grid(1, 1.0, 1, 9);
  const AdvectionSamples adv(g, fixture::constant_field(1, 1.0));
  const auto phi = oracle::random_vector(rng, g.nodes(), -1, 1);
  const auto div = d1_upwind_divergence(g, phi, adv, 0);
  for (int i = 0; i < 9; ++i) {
    const double back = (phi[i] - phi[(i + 8) % 9]) / g.dx();
    CHECK(div[i] == doctest::Approx(back).epsilon(1e-14));
  }
}

TEST_CASE("stencils match the naive oracle") {
  std::mt19937_64 rng(2024);
  for (int d : {1, 2}) {
    const auto g = make_grid(d, 1.0, 2, 4);
    for (int trial = 0; trial < 20; ++trial) {
      const auto table = oracle::random_vector(rng, g.nodes() * d, -3.0, 3.0);
      auto with_zeros = table;
      // Exercise sgn(0) = 0.
      with_zeros[0] = 0.0;
      const AdvectionSamples adv(g, fixture::table_field(g, with_zeros));
      const auto h = flatten_field(adv, 1);
      const auto phi = oracle::random_vector(rng, g.nodes(), -1.0, 1.0);

      const auto d2 = d2_laplacian(g, phi);
      const auto d11 = d1_upwind_gradient(g, phi, adv, 1);
      const auto d12 = d1_upwind_divergence(g, phi, adv, 1);
      const auto o2 = oracle::laplacian(phi, d, 4);
      const auto o11 = oracle::upwind_gradient(phi, h, d, 4);
      const auto o12 = oracle::upwind_divergence(phi, h, d, 4);
      // Absolute 1e-14 relative to the stencil scale 1/dx^2.
      const double scale2 = std::max(1.0, oracle::max_abs(o2));
      const double scale1 = std::max(1.0, std::max(oracle::max_abs(o11), oracle::max_abs(o12)));
      CHECK(oracle::max_abs_diff(d2, o2) <= 1e-14 * scale2);
      CHECK(oracle::max_abs_diff(d11, o11) <= 1e-14 * scale1);
      CHECK(oracle::max_abs_diff(d12, o12) <= 1e-14 * scale1);
    }
  }
}

TEST_CASE("stencils are linear") {
  std::mt19937_64 rng(17);
  const auto g = make_grid(2, 1.0, 1, 7);
  const AdvectionSamples adv(g, fixture::table_field(g, oracle::random_vector(rng, g.nodes() * 2, -1, 1)));
  for (int trial = 0; trial < 10; ++trial) {
    const auto phi = oracle::random_vector(rng, g.nodes(), -1, 1);
    const auto psi = oracle::random_vector(rng, g.nodes(), -1, 1);
    const double a = 1.7, b = -0.3;
    std::vector<double> mix(g.nodes());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * phi[i] + b * psi[i];

    auto check = [&](auto op) {
      const auto lhs = op(mix);
      const auto p = op(phi);
      const auto q = op(psi);
      std::vector<double> rhs(lhs.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * p[i] + b * q[i];
      CHECK(oracle::max_abs_diff(lhs, rhs) <= 1e-12 * std::max(1.0, oracle::max_abs(rhs)));
    };
    check([&](const std::vector<double>& v) { return d2_laplacian(g, v); });
    check([&](const std::vector<double>& v) { return d1_upwind_gradient(g, v, adv, 0); });
    check([&](const std::vector<double>& v) { return d1_upwind_divergence(g, v, adv, 0); });
  }
}

TEST_CASE("D2 and constant-sign D12 are conservative") {
  std::mt19937_64 rng(23);
  for (int d : {1, 2}) {
    const auto g = make_grid(d, 1.0, 1, 8);
    for (double sign : {1.0, -1.0}) {
      auto table = oracle::random_vector(rng, g.nodes() * d, 0.1, 2.0);
      for (auto& v : table) v *= sign;
      const AdvectionSamples adv(g, fixture::table_field(g, table));
      const auto phi = oracle::random_vector(rng, g.nodes(), 0, 1);
      double s2 = 0.0, s12 = 0.0, scale2 = 0.0, scale12 = 0.0;
      for (double v : d2_laplacian(g, phi)) s2 += v, scale2 += std::abs(v);
      for (double v : d1_upwind_divergence(g, phi, adv, 0)) s12 += v, scale12 += std::abs(v);
      CHECK(std::abs(s2) <= 1e-13 * scale2);
      CHECK(std::abs(s12) <= 1e-13 * scale12);
    }
  }
}

TEST_CASE("check_cfl examples") {
  const AdvectionSamples zero1 = AdvectionSamples::zero(make_grid(1, 0.1, 1000, 500));
  auto rep = check_cfl(make_grid(1, 0.1, 1000, 500), 0.01, zero1);
  CHECK(rep.lhs == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(rep.satisfied);
  CHECK(rep.satisfied_per_node);
  CHECK(rep.margin == doctest::Approx(0.5).epsilon(1e-14));

  // 4 nu dt / dx^2 = 2/5 with N_x = 50: dt = 0.4 / (0.04 * 2500) = 0.004, N_t = 25.
  const auto g2 = make_grid(2, 0.1, 25, 50);
  rep = check_cfl(g2, 0.01, AdvectionSamples::zero(g2));
  CHECK(rep.lhs == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(rep.satisfied);

  // dt chosen so that 2 nu dt / dx^2 = 1 + 1e-9.
  const double target = 1.0 + 1e-9;
  const double T = target * (1.0 / 100.0) * (1.0 / 100.0) / (2 * 0.01) * 10;
  const auto g3 = make_grid(1, T, 10, 100);
  rep = check_cfl(g3, 0.01, AdvectionSamples::zero(g3));
  CHECK(rep.lhs == doctest::Approx(target).epsilon(1e-13));
  CHECK_FALSE(rep.satisfied);
  CHECK(rep.margin < 0.0);

  CHECK_THROWS_AS(check_cfl(g3, 0.0, AdvectionSamples::zero(g3)), ConfigError);
}

TEST_CASE("check_cfl reports the sup-norm and the per-node forms") {
  const auto g = make_grid(2, 0.1, 100, 10);
  // h = (1, -1): sup norm 1, per-node l1 sum 2.
  const AdvectionSamples adv(g, [](double, std::span<const double>, std::span<double> out) {
    out[0] = 1.0;
    out[1] = -1.0;
  });
  CHECK(adv.sup_norm() == 1.0);
  CHECK(adv.max_l1() == 2.0);
  const auto rep = check_cfl(g, 0.01, adv);
  const double diff = 4 * 0.01 * g.dt() / (g.dx() * g.dx());
  CHECK(rep.lhs == doctest::Approx(g.dt() / g.dx() + diff).epsilon(1e-14));
  CHECK(rep.lhs_per_node == doctest::Approx(2 * g.dt() / g.dx() + diff).epsilon(1e-14));
}
