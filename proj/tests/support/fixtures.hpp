#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/problem.hpp"

namespace fixture {

// Node index of a coordinate that sits exactly on the grid.
inline std::size_t node_of(const mfg::GridSpec& g, std::span<const double> x) {
  std::size_t f = 0;
  for (int l = 0; l < g.dim(); ++l) {
    const auto c = static_cast<std::size_t>(std::llround(x[l] * g.nx())) % static_cast<std::size_t>(g.nx());
    f = f * g.nx() + c;
  }
  return f;
}

inline int level_of(const mfg::GridSpec& g, double t) { return static_cast<int>(std::llround(t / g.dt())); }

// Time-independent vector field from a node-major table h[i*d + l].
inline mfg::VectorFn table_field(const mfg::GridSpec& g, std::vector<double> table) {
  return [g, table = std::move(table)](double, std::span<const double> x, std::span<double> out) {
    const std::size_t i = node_of(g, x);
    for (int l = 0; l < g.dim(); ++l) out[l] = table[i * g.dim() + l];
  };
}

inline mfg::VectorFn constant_field(int d, double c) {
  return [d, c](double, std::span<const double>, std::span<double> out) {
    for (int l = 0; l < d; ++l) out[l] = c;
  };
}

// Problem with m-independent coupling Gamma = c and tabulated g / m0.
inline mfg::ProblemSpec tabulated_problem(const mfg::GridSpec& g, double nu, std::vector<double> terminal,
                                          std::vector<double> m0, double c, mfg::VectorFn h = {}) {
  mfg::ProblemSpec p;
  p.name = "tabulated";
  p.d = g.dim();
  p.nu = nu;
  p.T = g.horizon();
  p.advection = h ? std::move(h) : constant_field(g.dim(), 0.0);
  p.terminal = [g, terminal = std::move(terminal)](std::span<const double> x) { return terminal[node_of(g, x)]; };
  p.initial_density = [g, m0 = std::move(m0)](std::span<const double> x) { return m0[node_of(g, x)]; };
  p.coupling.eval = [c](double, std::span<const double>, std::span<const double>, std::size_t) { return c; };
  p.coupling_bound = c;
  return p;
}

}  // namespace fixture
