#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mfg {

/// Multi-index of a node on the periodic spatial lattice (components in [0, N_x)).
struct SpatialIndex {
  std::vector<int> components;

  friend bool operator==(const SpatialIndex&, const SpatialIndex&) = default;
};

/**
 * Uniform space-time grid on [0,T] x T^d, T^d the unit torus.
 *
 * Time levels t_n = n*dt for n = 0..N_t; spatial nodes x_i = i*dx with
 * i in [0, N_x)^d. Nodes are flattened row-major with axis 0 slowest, so
 * the stride of axis l is N_x^(d-1-l).
 */
class GridSpec {
 public:
  GridSpec(int d, double T, int nt, int nx);

  int dim() const noexcept { return d_; }
  double horizon() const noexcept { return T_; }
  int nt() const noexcept { return nt_; }
  int nx() const noexcept { return nx_; }
  double dt() const noexcept { return dt_; }
  double dx() const noexcept { return dx_; }

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t levels() const noexcept { return static_cast<std::size_t>(nt_) + 1; }
  std::size_t size() const noexcept { return levels() * nodes_; }
  std::size_t stride(int axis) const noexcept;

  double t(int n) const noexcept { return n * dt_; }
  /// Writes the coordinates of flat node `flat` into x (size d).
  void coordinates(std::size_t flat, std::span<double> x) const;

  std::size_t flatten(const SpatialIndex& idx) const;
  SpatialIndex unflatten(std::size_t flat) const;
  SpatialIndex canonical(SpatialIndex idx) const;
  SpatialIndex neighbor(const SpatialIndex& idx, int axis, int shift) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int d_;
  double T_;
  int nt_;
  int nx_;
  double dt_;
  double dx_;
  std::size_t nodes_;
};

/// Throws ConfigError unless d >= 1, T > 0, N_t >= 1, N_x >= 2.
GridSpec make_grid(int d, double T, int nt, int nx);

/// Scalar function of (t, x).
using SpaceTimeFn = std::function<double(double t, std::span<const double> x)>;
/// Scalar function of x only.
using SpaceFn = std::function<double(std::span<const double> x)>;
/// d-vector valued function of (t, x); writes into `out`.
using VectorFn = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

/// Real values on every (n, i) of the grid, level-major.
class GridFunction {
 public:
  explicit GridFunction(GridSpec grid, double fill = 0.0);
  GridFunction(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }

  std::span<double> level(int n);
  std::span<const double> level(int n) const;

  double& operator()(int n, std::size_t i) { return values_[n * grid_.nodes() + i]; }
  double operator()(int n, std::size_t i) const { return values_[n * grid_.nodes() + i]; }

  std::span<double> values() & noexcept { return values_; }
  std::span<const double> values() const& noexcept { return values_; }
  /// On a temporary the storage is moved out, so range-for over it is safe.
  std::vector<double> values() && noexcept { return std::move(values_); }

  double min() const;
  double max() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Flat table of node coordinates (nodes x d), reused by tabulation loops.
class NodeCoordinates {
 public:
  explicit NodeCoordinates(const GridSpec& grid);
  std::span<const double> operator[](std::size_t flat) const {
    return {coords_.data() + flat * d_, static_cast<std::size_t>(d_)};
  }

 private:
  int d_;
  std::vector<double> coords_;
};

/// Tabulates fn(t_n, x_i) on every node; throws SamplingError naming (n, i) on non-finite values.
GridFunction sample(const GridSpec& grid, const SpaceTimeFn& fn);
/// Tabulates fn(x_i) on one spatial slice.
std::vector<double> sample_space(const GridSpec& grid, const SpaceFn& fn);

}  // namespace mfg
