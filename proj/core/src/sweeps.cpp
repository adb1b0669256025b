#include "mfg/sweeps.hpp"

#include <algorithm>
#include <sstream>

#include "axis_loop.hpp"
#include "mfg/errors.hpp"

namespace mfg {

CflReport require_cfl(const GridSpec& grid, double nu, const AdvectionSamples& adv,
                      std::string_view context) {
  const CflReport rep = check_cfl(grid, nu, adv);
  if (!rep.satisfied_per_node) {
    std::ostringstream msg;
    msg.precision(17);
    msg << context << ": CFL condition violated, lhs = " << rep.lhs_per_node
        << " > 1 (sup-norm form lhs = " << rep.lhs << ", N_t = " << grid.nt()
        << ", N_x = " << grid.nx() << ")";
    throw CflViolation(msg.str(), rep.lhs_per_node);
  }
  return rep;
}

namespace {

void finish_level(const GridSpec& grid, double nu, std::span<const double> base,
                  std::span<const double> gamma, std::span<double> out) {
  const double dt = grid.dt();
  const std::size_t nodes = grid.nodes();
  if (gamma.empty()) {
    for (std::size_t i = 0; i < nodes; ++i) out[i] = base[i] + dt * out[i];
    return;
  }
  const double c = dt / (2.0 * nu);
  for (std::size_t i = 0; i < nodes; ++i) out[i] = (base[i] + dt * out[i]) / (1.0 + c * gamma[i]);
}

}  // namespace

void backward_level(const GridSpec& grid, double nu, const AdvectionSamples& adv, int n,
                    std::span<const double> phi, std::span<const double> gamma,
                    std::span<double> out) {
  const double inv_dx = 1.0 / grid.dx();
  const double nu_dx2 = nu * inv_dx * inv_dx;
  std::fill(out.begin(), out.end(), 0.0);
  for (int l = 0; l < grid.dim(); ++l) {
    if (adv.is_zero()) {
      detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
        out[i] += (phi[ip] - 2.0 * phi[i] + phi[im]) * nu_dx2;
      });
      continue;
    }
    const auto hp = adv.plus(n, l);
    const auto hm = adv.minus(n, l);
    detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
      out[i] += (phi[ip] - 2.0 * phi[i] + phi[im]) * nu_dx2 +
                (hp[i] * (phi[ip] - phi[i]) - hm[i] * (phi[i] - phi[im])) * inv_dx;
    });
  }
  finish_level(grid, nu, phi, gamma, out);
}

void forward_level(const GridSpec& grid, double nu, const AdvectionSamples& adv, int n,
                   std::span<const double> psi, std::span<const double> gamma,
                   std::span<double> out) {
  const double inv_dx = 1.0 / grid.dx();
  const double nu_dx2 = nu * inv_dx * inv_dx;
  std::fill(out.begin(), out.end(), 0.0);
  for (int l = 0; l < grid.dim(); ++l) {
    if (adv.is_zero()) {
      detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
        out[i] += (psi[ip] - 2.0 * psi[i] + psi[im]) * nu_dx2;
      });
      continue;
    }
    const auto h = adv.component(n, l);
    detail::for_each_along_axis(grid, l, [&](std::size_t i, std::size_t ip, std::size_t im) {
      const double s = detail::sgn(h[i]);
      const double div = 0.5 * (1.0 - s) * (h[ip] * psi[ip] - h[i] * psi[i]) +
                         0.5 * (1.0 + s) * (h[i] * psi[i] - h[im] * psi[im]);
      out[i] += (psi[ip] - 2.0 * psi[i] + psi[im]) * nu_dx2 - div * inv_dx;
    });
  }
  finish_level(grid, nu, psi, gamma, out);
}

}  // namespace mfg
