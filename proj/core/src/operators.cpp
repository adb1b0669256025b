#include "mfg/operators.hpp"

#include <algorithm>
#include <cmath>

#include "axis_loop.hpp"
#include "mfg/errors.hpp"

namespace mfg {

UpwindSplit upwind_split(std::span<const double> v) {
  UpwindSplit s{std::vector<double>(v.size()), std::vector<double>(v.size())};
  for (std::size_t l = 0; l < v.size(); ++l) {
    s.plus[l] = std::max(v[l], 0.0);
    s.minus[l] = std::max(-v[l], 0.0);
  }
  return s;
}

AdvectionSamples::AdvectionSamples(const GridSpec& grid) : grid_(grid), zeros_(grid.nodes(), 0.0) {}

AdvectionSamples AdvectionSamples::zero(const GridSpec& grid) { return AdvectionSamples(grid); }

AdvectionSamples::AdvectionSamples(const GridSpec& grid, const VectorFn& h) : AdvectionSamples(grid) {
  const int d = grid.dim();
  const std::size_t nodes = grid.nodes();
  h_.assign(grid.size() * d, 0.0);
  const NodeCoordinates xs(grid);
  std::vector<double> hv(d);
  std::vector<double> l1(nodes);
  for (int n = 0; n <= grid.nt(); ++n) {
    const double t = grid.t(n);
    std::fill(l1.begin(), l1.end(), 0.0);
    for (std::size_t i = 0; i < nodes; ++i) {
      std::fill(hv.begin(), hv.end(), 0.0);
      h(t, xs[i], hv);
      for (int l = 0; l < d; ++l) {
        if (!std::isfinite(hv[l])) throw SamplingError("advection: non-finite sample");
        h_[(static_cast<std::size_t>(n) * d + l) * nodes + i] = hv[l];
        sup_norm_ = std::max(sup_norm_, std::abs(hv[l]));
        l1[i] += std::abs(hv[l]);
      }
    }
    max_l1_ = std::max(max_l1_, *std::max_element(l1.begin(), l1.end()));
  }
  zero_ = sup_norm_ == 0.0;
  if (zero_) {
    h_.clear();
    h_.shrink_to_fit();
    return;
  }
  plus_.resize(h_.size());
  minus_.resize(h_.size());
  for (std::size_t k = 0; k < h_.size(); ++k) {
    plus_[k] = std::max(h_[k], 0.0);
    minus_[k] = std::max(-h_[k], 0.0);
  }
}

std::span<const double> AdvectionSamples::block(const std::vector<double>& v, int n, int axis) const {
  if (zero_) return zeros_;
  const std::size_t nodes = grid_.nodes();
  return {v.data() + (static_cast<std::size_t>(n) * grid_.dim() + axis) * nodes, nodes};
}

std::span<const double> AdvectionSamples::component(int n, int axis) const { return block(h_, n, axis); }
std::span<const double> AdvectionSamples::plus(int n, int axis) const { return block(plus_, n, axis); }
std::span<const double> AdvectionSamples::minus(int n, int axis) const { return block(minus_, n, axis); }

void d2_laplacian(const GridSpec& grid, std::span<const double> phi, std::span<double> out) {
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  std::fill(out.begin(), out.end(), 0.0);
  for (int l = 0; l < grid.dim(); ++l) {
    detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
      out[i] += (phi[ip] - 2.0 * phi[i] + phi[im]) * inv_dx2;
    });
  }
}

std::vector<double> d2_laplacian(const GridSpec& grid, std::span<const double> phi) {
  std::vector<double> out(grid.nodes());
  d2_laplacian(grid, phi, out);
  return out;
}

void d1_upwind_gradient(const GridSpec& grid, std::span<const double> phi,
                        const AdvectionSamples& adv, int n, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (adv.is_zero()) return;
  const double inv_dx = 1.0 / grid.dx();
  for (int l = 0; l < grid.dim(); ++l) {
    const auto hp = adv.plus(n, l);
    const auto hm = adv.minus(n, l);
    detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
      out[i] += hp[i] * (phi[ip] - phi[i]) * inv_dx - hm[i] * (phi[i] - phi[im]) * inv_dx;
    });
  }
}

std::vector<double> d1_upwind_gradient(const GridSpec& grid, std::span<const double> phi,
                                       const AdvectionSamples& adv, int n) {
  std::vector<double> out(grid.nodes());
  d1_upwind_gradient(grid, phi, adv, n, out);
  return out;
}

void d1_upwind_divergence(const GridSpec& grid, std::span<const double> phi,
                          const AdvectionSamples& adv, int n, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (adv.is_zero()) return;
  const double inv_dx = 1.0 / grid.dx();
  for (int l = 0; l < grid.dim(); ++l) {
    const auto h = adv.component(n, l);
    detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
      const double s = detail::sgn(h[i]);
      out[i] += 0.5 * (1.0 - s) * (h[ip] * phi[ip] - h[i] * phi[i]) * inv_dx +
                0.5 * (1.0 + s) * (h[i] * phi[i] - h[im] * phi[im]) * inv_dx;
    });
  }
}

std::vector<double> d1_upwind_divergence(const GridSpec& grid, std::span<const double> phi,
                                         const AdvectionSamples& adv, int n) {
  std::vector<double> out(grid.nodes());
  d1_upwind_divergence(grid, phi, adv, n, out);
  return out;
}

CflReport check_cfl(const GridSpec& grid, double nu, const AdvectionSamples& adv) {
  if (!(nu > 0.0)) throw ConfigError("cfl: nu must be positive");
  const double r1 = grid.dt() / grid.dx();
  const double diffusion = 2.0 * grid.dim() * nu * grid.dt() / (grid.dx() * grid.dx());
  CflReport rep;
  rep.lhs = adv.sup_norm() * r1 + diffusion;
  rep.margin = 1.0 - rep.lhs;
  rep.satisfied = rep.lhs <= 1.0;
  rep.lhs_per_node = adv.max_l1() * r1 + diffusion;
  rep.satisfied_per_node = rep.lhs_per_node <= 1.0;
  return rep;
}

}  // namespace mfg
