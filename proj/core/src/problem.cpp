#include "mfg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Congestion part of the example couplings: 4 min(m, 5).
double congestion(double m) { return 4.0 * std::min(m, 5.0); }

ProblemSpec example_1d_base(std::string name, double h) {
  ProblemSpec p;
  p.name = std::move(name);
  p.d = 1;
  p.nu = 0.01;
  p.T = 0.1;
  p.advection = [h](double, std::span<const double>, std::span<double> out) { out[0] = h; };
  p.terminal = [](std::span<const double> x) { return -std::cos(kTwoPi * x[0]) / kTwoPi; };
  p.initial_density = [](std::span<const double> x) {
    constexpr double sigma = 0.1;
    const double z = x[0] - 0.5;
    return std::exp(-z * z / (2.0 * sigma * sigma)) / std::sqrt(kTwoPi * sigma * sigma);
  };
  p.coupling.kind = CouplingKind::local;
  p.coupling.eval = [](double, std::span<const double> x, std::span<const double> m, std::size_t i) {
    const double z = x[0] - 0.5;
    return z * z + congestion(m[i]);
  };
  // x ranges over [0, 1), so (x - 1/2)^2 <= 1/4.
  p.coupling_bound = 0.25 + 20.0;
  return p;
}

}  // namespace

void ProblemSpec::validate() const {
  if (d < 1) throw ConfigError("problem: dimension must be >= 1");
  if (!(nu > 0.0)) throw ConfigError("problem: nu must be positive");
  if (!(T > 0.0)) throw ConfigError("problem: T must be positive");
  if (!(coupling_bound >= 0.0)) throw ConfigError("problem: coupling bound must be >= 0");
  if (!advection || !coupling.eval || !terminal || !initial_density) {
    throw ConfigError("problem: missing callable");
  }
}

ProblemSpec example_1d() { return example_1d_base("ex1d", 0.0); }

ProblemSpec example_1d_advection() { return example_1d_base("ex1d-adv", 1.0); }

ProblemSpec example_2d() {
  ProblemSpec p;
  p.name = "ex2d";
  p.d = 2;
  p.nu = 0.01;
  p.T = 0.1;
  p.advection = [](double, std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
    out[1] = 0.0;
  };
  p.terminal = [](std::span<const double> x) {
    return -(std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1])) / kTwoPi;
  };
  p.initial_density = [](std::span<const double> x) {
    constexpr double sigma = 0.25;
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    return std::exp(-r2 / (2.0 * sigma * sigma)) / (kTwoPi * sigma * sigma);
  };
  p.coupling.kind = CouplingKind::local;
  p.coupling.eval = [](double, std::span<const double> x, std::span<const double> m, std::size_t i) {
    const double r2 = (x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.5) * (x[1] - 0.5);
    return r2 + congestion(m[i]);
  };
  p.coupling_bound = 0.5 + 20.0;
  return p;
}

ProblemSpec problem_by_name(std::string_view name) {
  if (name == "ex1d") return example_1d();
  if (name == "ex1d-adv") return example_1d_advection();
  if (name == "ex2d") return example_2d();
  throw ConfigError("unknown problem '" + std::string(name) + "' (expected ex1d, ex1d-adv or ex2d)");
}

std::vector<std::string> problem_names() { return {"ex1d", "ex1d-adv", "ex2d"}; }

std::vector<double> sample_initial_density(const ProblemSpec& problem, const GridSpec& grid) {
  auto m0 = sample_space(grid, problem.initial_density);
  if (std::any_of(m0.begin(), m0.end(), [](double v) { return v < 0.0; })) {
    throw ConfigError("problem '" + problem.name + "': initial density is negative at a node");
  }
  return m0;
}

}  // namespace mfg
