#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfg/errors.hpp"

namespace mfg {

GridSpec::GridSpec(int d, double T, int nt, int nx)
    : d_(d), T_(T), nt_(nt), nx_(nx), dt_(0.0), dx_(0.0), nodes_(0) {
  if (d < 1) throw ConfigError("grid: dimension must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("grid: horizon T must be positive");
  if (nt < 1) throw ConfigError("grid: N_t must be >= 1");
  if (nx < 2) throw ConfigError("grid: N_x must be >= 2");
  dt_ = T / nt;
  dx_ = 1.0 / nx;
  nodes_ = 1;
  for (int l = 0; l < d; ++l) nodes_ *= static_cast<std::size_t>(nx);
}

GridSpec make_grid(int d, double T, int nt, int nx) { return GridSpec(d, T, nt, nx); }

std::size_t GridSpec::stride(int axis) const noexcept {
  std::size_t s = 1;
  for (int l = axis + 1; l < d_; ++l) s *= static_cast<std::size_t>(nx_);
  return s;
}

void GridSpec::coordinates(std::size_t flat, std::span<double> x) const {
  for (int l = d_ - 1; l >= 0; --l) {
    x[l] = static_cast<double>(flat % nx_) * dx_;
    flat /= nx_;
  }
}

std::size_t GridSpec::flatten(const SpatialIndex& idx) const {
  if (static_cast<int>(idx.components.size()) != d_) {
    throw ConfigError("grid: index dimension mismatch");
  }
  std::size_t flat = 0;
  for (int l = 0; l < d_; ++l) {
    int c = idx.components[l] % nx_;
    if (c < 0) c += nx_;
    flat = flat * nx_ + static_cast<std::size_t>(c);
  }
  return flat;
}

SpatialIndex GridSpec::unflatten(std::size_t flat) const {
  SpatialIndex idx{std::vector<int>(d_)};
  for (int l = d_ - 1; l >= 0; --l) {
    idx.components[l] = static_cast<int>(flat % nx_);
    flat /= nx_;
  }
  return idx;
}

SpatialIndex GridSpec::canonical(SpatialIndex idx) const {
  for (auto& c : idx.components) {
    c %= nx_;
    if (c < 0) c += nx_;
  }
  return idx;
}

SpatialIndex GridSpec::neighbor(const SpatialIndex& idx, int axis, int shift) const {
  SpatialIndex out = idx;
  int c = (out.components.at(axis) + shift) % nx_;
  if (c < 0) c += nx_;
  out.components[axis] = c;
  return out;
}

GridFunction::GridFunction(GridSpec grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

GridFunction::GridFunction(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw GridMismatch("grid function: value count does not match (N_t+1)*N_x^d");
  }
}

std::span<double> GridFunction::level(int n) {
  return {values_.data() + n * grid_.nodes(), grid_.nodes()};
}

std::span<const double> GridFunction::level(int n) const {
  return {values_.data() + n * grid_.nodes(), grid_.nodes()};
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

NodeCoordinates::NodeCoordinates(const GridSpec& grid)
    : d_(grid.dim()), coords_(grid.nodes() * grid.dim()) {
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    grid.coordinates(i, {coords_.data() + i * d_, static_cast<std::size_t>(d_)});
  }
}

GridFunction sample(const GridSpec& grid, const SpaceTimeFn& fn) {
  GridFunction out(grid);
  const NodeCoordinates xs(grid);
  for (int n = 0; n <= grid.nt(); ++n) {
    const double t = grid.t(n);
    auto lvl = out.level(n);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double v = fn(t, xs[i]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "sample: non-finite value at (n=" << n << ", i=" << i << ")";
        throw SamplingError(msg.str());
      }
      lvl[i] = v;
    }
  }
  return out;
}

std::vector<double> sample_space(const GridSpec& grid, const SpaceFn& fn) {
  std::vector<double> out(grid.nodes());
  const NodeCoordinates xs(grid);
  for (std::size_t i = 0; i < grid.nodes(); ++i) {
    const double v = fn(xs[i]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "sample: non-finite value at node i=" << i;
      throw SamplingError(msg.str());
    }
    out[i] = v;
  }
  return out;
}

}  // namespace mfg
