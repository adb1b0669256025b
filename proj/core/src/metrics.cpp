#include "mfg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

namespace {

void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("metric: grid functions live on different grids");
}

double level_max_abs(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double cell_volume(const GridSpec& g) { return std::pow(g.dx(), g.dim()); }

// Index of the level t falls on, or -1 if it lies strictly between levels.
int exact_level(double pos, int nt) {
  const double r = std::round(pos);
  if (std::abs(pos - r) <= 1e-9 * std::max(1.0, std::abs(pos))) {
    return std::clamp(static_cast<int>(r), 0, nt);
  }
  return -1;
}

double spatial_interp(const GridSpec& g, std::span<const double> level, std::span<const double> x) {
  const int d = g.dim();
  const int nx = g.nx();
  std::vector<int> lo(d);
  std::vector<double> w(d);
  for (int l = 0; l < d; ++l) {
    double pos = x[l] * nx;
    const int snapped = exact_level(pos, nx);
    if (snapped >= 0) {
      lo[l] = snapped % nx;
      w[l] = 0.0;
      continue;
    }
    const double f = std::floor(pos);
    w[l] = pos - f;
    int c = static_cast<int>(f) % nx;
    if (c < 0) c += nx;
    lo[l] = c;
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (int l = 0; l < d; ++l) {
      const bool up = (corner >> l) & 1;
      if (up && w[l] == 0.0) {
        weight = 0.0;
        break;
      }
      weight *= up ? w[l] : 1.0 - w[l];
      const int c = up ? (lo[l] + 1) % nx : lo[l];
      flat = flat * nx + static_cast<std::size_t>(c);
    }
    if (weight != 0.0) acc += weight * level[flat];
  }
  return acc;
}

}  // namespace

double metric_I(const GridFunction& fn, const GridFunction& ref) {
  require_same_grid(fn, ref);
  const auto& g = fn.grid();
  double sum = 0.0;
  for (int n = 0; n < g.nt(); ++n) {
    const double m = level_max_abs(fn.level(n), ref.level(n));
    sum += m * m * g.dt();
  }
  return std::sqrt(sum);
}

double metric_E(const GridFunction& fn, const GridFunction& ref) {
  require_same_grid(fn, ref);
  double m = 0.0;
  for (int n = 0; n <= fn.grid().nt(); ++n) m = std::max(m, level_max_abs(fn.level(n), ref.level(n)));
  return m;
}

double metric_I_tilde(const GridFunction& fn, const GridFunction& ref) {
  require_same_grid(fn, ref);
  const auto& g = fn.grid();
  const double vol = cell_volume(g);
  double worst = 0.0;
  for (int n = 0; n < g.nt(); ++n) {
    const auto a = fn.level(n);
    const auto b = ref.level(n);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    worst = std::max(worst, std::sqrt(s * vol));
  }
  return worst;
}

double metric_I(const GridFunction& fn, const SpaceTimeFn& ref) { return metric_I(fn, sample(fn.grid(), ref)); }
double metric_E(const GridFunction& fn, const SpaceTimeFn& ref) { return metric_E(fn, sample(fn.grid(), ref)); }
double metric_I_tilde(const GridFunction& fn, const SpaceTimeFn& ref) {
  return metric_I_tilde(fn, sample(fn.grid(), ref));
}

double interpolate_reference(const GridFunction& ref, double t, std::span<const double> x) {
  const auto& g = ref.grid();
  const double pos = t / g.dt();
  const int n = exact_level(pos, g.nt());
  if (n >= 0) return spatial_interp(g, ref.level(n), x);
  const int n0 = std::clamp(static_cast<int>(std::floor(pos)), 0, g.nt() - 1);
  const double w = pos - n0;
  return (1.0 - w) * spatial_interp(g, ref.level(n0), x) + w * spatial_interp(g, ref.level(n0 + 1), x);
}

GridFunction tabulate_reference(const GridFunction& ref, const GridSpec& coarse) {
  const auto& fine = ref.grid();
  if (fine.dim() != coarse.dim()) throw GridMismatch("reference: dimension differs");
  if (std::abs(fine.horizon() - coarse.horizon()) > 1e-12 * fine.horizon()) {
    throw GridMismatch("reference: horizon differs");
  }
  if (fine == coarse) return ref;
  GridFunction out(coarse);
  const NodeCoordinates xs(coarse);
  for (int n = 0; n <= coarse.nt(); ++n) {
    auto lvl = out.level(n);
    const double t = coarse.t(n);
    for (std::size_t i = 0; i < coarse.nodes(); ++i) lvl[i] = interpolate_reference(ref, t, xs[i]);
  }
  return out;
}

namespace {

RegressionFit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx <= 0.0) throw ConfigError("regression: abscissae are all equal");
  RegressionFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.n_points = static_cast<int>(xs.size());
  return fit;
}

}  // namespace

RegressionFit fit_loglog(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw ConfigError("regression: need at least two points");
  std::vector<double> xs, ys;
  for (const auto& [h, e] : points) {
    if (!(h > 0.0) || !(e > 0.0)) throw ConfigError("regression: values must be positive");
    xs.push_back(std::log(h));
    ys.push_back(std::log(e));
  }
  return ols(xs, ys);
}

RegressionFit fit_iteration_order(std::span<const std::pair<long, double>> points, double k1) {
  std::vector<std::pair<double, double>> shifted;
  shifted.reserve(points.size());
  for (const auto& [k, e] : points) shifted.emplace_back(static_cast<double>(k) + k1, e);
  return fit_loglog(shifted);
}

}  // namespace mfg
