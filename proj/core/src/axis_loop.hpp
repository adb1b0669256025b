#pragma once

#include <cstddef>

#include "mfg/grid.hpp"

namespace mfg::detail {

// Visits every node of one spatial slice along `axis`, passing the flat
// index of the node and of its periodic +1 / -1 neighbours on that axis.
// The innermost loop runs over the contiguous trailing block so it
// vectorizes for every axis but the last.
template <class F>
inline void for_each_along_axis(const GridSpec& grid, int axis, F&& f) {
  const std::size_t nx = static_cast<std::size_t>(grid.nx());
  const std::size_t s = grid.stride(axis);
  const std::size_t outer = grid.nodes() / (nx * s);
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * nx * s;
    for (std::size_t c = 0; c < nx; ++c) {
      const std::size_t cp = (c + 1 == nx) ? 0 : c + 1;
      const std::size_t cm = (c == 0) ? nx - 1 : c - 1;
      const std::size_t b = base + c * s;
      const std::size_t bp = base + cp * s;
      const std::size_t bm = base + cm * s;
      for (std::size_t j = 0; j < s; ++j) f(b + j, bp + j, bm + j);
    }
  }
}

inline double sgn(double v) noexcept { return (v > 0.0) - (v < 0.0); }

}  // namespace mfg::detail
