#pragma once

#include <span>
#include <string_view>

#include "mfg/grid.hpp"
#include "mfg/operators.hpp"

namespace mfg {

/// Throws CflViolation unless the per-node CFL bound holds; returns the report otherwise.
CflReport require_cfl(const GridSpec& grid, double nu, const AdvectionSamples& adv,
                      std::string_view context);

/// One backward step of the value sweep:
///   out_i = (phi_i + dt (nu D2 phi + D11 phi)_i) / (1 + dt gamma_i / (2 nu)),
/// stencils and h taken at level n. `gamma` may be empty (gamma = 0).
void backward_level(const GridSpec& grid, double nu, const AdvectionSamples& adv, int n,
                    std::span<const double> phi, std::span<const double> gamma,
                    std::span<double> out);

/// One forward step of the density-factor sweep:
///   out_i = (psi_i + dt (nu D2 psi - D12 psi)_i) / (1 + dt gamma_i / (2 nu)),
/// stencils and h taken at level n. `gamma` may be empty (gamma = 0).
void forward_level(const GridSpec& grid, double nu, const AdvectionSamples& adv, int n,
                   std::span<const double> psi, std::span<const double> gamma,
                   std::span<double> out);

}  // namespace mfg
