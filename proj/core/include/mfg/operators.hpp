#pragma once

#include <span>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

/// Componentwise positive and negative parts: v = plus - minus, both >= 0.
struct UpwindSplit {
  std::vector<double> plus;
  std::vector<double> minus;
};

UpwindSplit upwind_split(std::span<const double> v);

/**
 * Advection field h tabulated on every (n, i) together with its upwind
 * parts h+ = max(h, 0) and h- = max(-h, 0).
 *
 * Storage is component-major within a level: component l of level n is the
 * contiguous block [(n*d + l)*nodes, (n*d + l + 1)*nodes). A field that
 * samples to exactly zero keeps no per-node storage.
 */
class AdvectionSamples {
 public:
  AdvectionSamples(const GridSpec& grid, const VectorFn& h);
  static AdvectionSamples zero(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  bool is_zero() const noexcept { return zero_; }

  std::span<const double> component(int n, int axis) const;
  std::span<const double> plus(int n, int axis) const;
  std::span<const double> minus(int n, int axis) const;

  /// max over all nodes and components of |h^l|.
  double sup_norm() const noexcept { return sup_norm_; }
  /// max over all nodes of sum_l |h^l|.
  double max_l1() const noexcept { return max_l1_; }

 private:
  explicit AdvectionSamples(const GridSpec& grid);
  std::span<const double> block(const std::vector<double>& v, int n, int axis) const;

  GridSpec grid_;
  bool zero_ = true;
  std::vector<double> h_;
  std::vector<double> plus_;
  std::vector<double> minus_;
  std::vector<double> zeros_;
  double sup_norm_ = 0.0;
  double max_l1_ = 0.0;
};

/// sum_l (phi[i+e_l] - 2 phi[i] + phi[i-e_l]) / dx^2
void d2_laplacian(const GridSpec& grid, std::span<const double> phi, std::span<double> out);
std::vector<double> d2_laplacian(const GridSpec& grid, std::span<const double> phi);

/// Upwind h . grad(phi) at level n.
void d1_upwind_gradient(const GridSpec& grid, std::span<const double> phi,
                        const AdvectionSamples& adv, int n, std::span<double> out);
std::vector<double> d1_upwind_gradient(const GridSpec& grid, std::span<const double> phi,
                                       const AdvectionSamples& adv, int n);

/// Upwind div(h phi) at level n; the branch weights are (1 -+ sgn h)/2 with sgn(0) = 0.
void d1_upwind_divergence(const GridSpec& grid, std::span<const double> phi,
                          const AdvectionSamples& adv, int n, std::span<double> out);
std::vector<double> d1_upwind_divergence(const GridSpec& grid, std::span<const double> phi,
                                         const AdvectionSamples& adv, int n);

struct CflReport {
  /// lhs = sup|h| dt/dx + 2 d nu dt/dx^2 <= 1
  bool satisfied = false;
  double lhs = 0.0;
  double margin = 0.0;
  /// Stricter per-node form max_i sum_l |h^l_i| dt/dx + 2 d nu dt/dx^2 <= 1,
  /// which is what keeps every sweep a convex combination.
  bool satisfied_per_node = false;
  double lhs_per_node = 0.0;
};

CflReport check_cfl(const GridSpec& grid, double nu, const AdvectionSamples& adv);

}  // namespace mfg
