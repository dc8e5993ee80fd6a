#include "kfr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kfr {

Grid::Grid(double left_, double right_, int n_cells_)
    : left(left_), right(right_), n_cells(n_cells_) {
  require(right > left, ErrorCode::bad_parameter, "grid requires right > left");
  require(n_cells >= 2, ErrorCode::bad_parameter, "grid requires n_cells >= 2");
  require(std::isfinite(left) && std::isfinite(right), ErrorCode::bad_parameter,
          "grid endpoints must be finite");
}

DiscreteMeasure::DiscreteMeasure(Grid g, std::vector<double> density_)
    : grid(g), density(std::move(density_)) {
  require(static_cast<int>(density.size()) == grid.n_cells,
          ErrorCode::bad_parameter, "density size must equal n_cells");
  for (double v : density) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::bad_parameter,
            "density values must be finite and nonnegative");
  }
}

SampledMeasure measure_from_fn(const Grid& grid,
                               const std::function<double(double)>& f) {
  std::vector<double> rho(grid.n_cells);
  bool clamped = false;
  for (int i = 0; i < grid.n_cells; ++i) {
    double v = f(grid.cell_center(i));
    if (v < 0.0) {
      v = 0.0;
      clamped = true;
    }
    rho[i] = v;
  }
  return {DiscreteMeasure(grid, std::move(rho)), clamped};
}

double total_mass(const DiscreteMeasure& m) {
  double s = 0.0;
  for (double v : m.density) s += v;
  return m.grid.h() * s;
}

LagrangianRep to_lagrangian(const DiscreteMeasure& m, int n_particles) {
  require(n_particles >= 1, ErrorCode::bad_parameter, "n_particles >= 1");
  const double mass = total_mass(m);
  require(mass > 0.0, ErrorCode::zero_mass,
          "to_lagrangian needs a measure with positive mass");

  const int n = m.grid.n_cells;
  const double h = m.grid.h();
  // Cumulative mass at cell left edges; cum[n] == mass up to roundoff.
  std::vector<double> cum(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cum[i + 1] = cum[i] + h * m.density[i];

  // Linear reconstruction per cell: central slope clamped so both edge
  // values stay nonnegative. Preserves cell masses; keeps the repeated
  // Eulerian<->Lagrangian round trips of the splitting driver from acting
  // as first-order numerical diffusion (the clamp only engages near
  // vacuum, where the density itself is small).
  std::vector<double> slope(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double central = (m.density[i + 1] - m.density[i - 1]) / (2.0 * h);
    const double cap = 2.0 * m.density[i] / h;
    slope[i] = std::clamp(central, -cap, cap);
  }

  const double dm = mass / n_particles;
  LagrangianRep rep;
  rep.mass_quantum = dm;
  rep.positions.resize(n_particles);

  int cell = 0;
  for (int k = 0; k < n_particles; ++k) {
    const double w = std::min((k + 0.5) * dm, cum[n]);
    while (cell < n - 1 && (cum[cell + 1] < w || m.density[cell] == 0.0))
      ++cell;
    const double rho = m.density[cell];
    double x = m.grid.cell_left(cell);
    if (rho > 0.0) {
      // Solve rho*u + (s/2)(u^2 - h*u) = w - cum[cell] for u in [0, h];
      // the left-edge value b = rho - s*h/2 is nonnegative by the limiter.
      const double target = w - cum[cell];
      const double s = slope[cell];
      const double b = rho - 0.5 * s * h;
      const double disc = b * b + 2.0 * s * target;
      double u;
      if (s != 0.0 && disc > 0.0 && b + std::sqrt(disc) > 0.0)
        u = 2.0 * target / (b + std::sqrt(disc));
      else
        u = target / rho;
      x += std::clamp(u, 0.0, h);
    }
    rep.positions[k] = std::clamp(x, m.grid.left, m.grid.right);
  }
  // Strict monotonicity can only be lost to roundoff when several levels
  // land in one near-vacuum cell; nudge forward deterministically.
  for (int k = 1; k < n_particles; ++k) {
    if (!(rep.positions[k] > rep.positions[k - 1])) {
      rep.positions[k] = std::nextafter(rep.positions[k - 1],
                                        std::numeric_limits<double>::max());
    }
  }
  return rep;
}

DiscreteMeasure from_lagrangian(const LagrangianRep& rep, const Grid& grid) {
  const int np = static_cast<int>(rep.positions.size());
  require(np >= 1, ErrorCode::bad_parameter, "empty particle set");
  require(rep.mass_quantum > 0.0, ErrorCode::bad_parameter,
          "mass_quantum must be positive");
  const double h = grid.h();
  const double dm = rep.mass_quantum;

  std::vector<double> x = rep.positions;
  for (int k = 0; k < np; ++k) {
    require(x[k] >= grid.left - h && x[k] <= grid.right + h,
            ErrorCode::out_of_domain,
            "particle escaped the domain by more than h");
    x[k] = std::clamp(x[k], grid.left, grid.right);
    if (k > 0 && !(x[k] > x[k - 1]))
      x[k] = std::nextafter(x[k - 1], std::numeric_limits<double>::max());
  }

  // Particle k is the (k+1/2) dm quantile. Interpolate the cumulative mass
  // through these points with a monotone (Fritsch-Carlson) cubic, anchored
  // at zero/full mass half a gap beyond the end particles, and read cell
  // masses off the interpolant at the cell edges. Evaluating one function
  // at the edges makes the deposition exactly conservative, and
  // monotonicity keeps every cell mass nonnegative.
  const double lead = (np > 1) ? 0.5 * (x[1] - x[0]) : 0.5 * h;
  const double trail = (np > 1) ? 0.5 * (x[np - 1] - x[np - 2]) : 0.5 * h;

  std::vector<double> t, y;
  t.reserve(np + 2);
  y.reserve(np + 2);
  t.push_back(std::max(grid.left, x[0] - lead));
  y.push_back(0.0);
  for (int k = 0; k < np; ++k) {
    if (x[k] > t.back()) {
      t.push_back(x[k]);
      y.push_back((k + 0.5) * dm);
    } else {
      y.back() = (k + 0.5) * dm;  // coincident node: keep the mass jump
    }
  }
  const double x_end = std::min(grid.right, x[np - 1] + trail);
  if (x_end > t.back()) {
    t.push_back(x_end);
    y.push_back(np * dm);
  } else {
    y.back() = np * dm;
  }

  const int p = static_cast<int>(t.size());
  std::vector<double> sec(std::max(0, p - 1), 0.0), d(p, 0.0);
  for (int i = 0; i + 1 < p; ++i) sec[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
  if (p >= 2) {
    d[0] = sec[0];
    d[p - 1] = sec[p - 2];
    for (int i = 1; i + 1 < p; ++i)
      d[i] = (sec[i - 1] > 0.0 && sec[i] > 0.0)
                 ? 2.0 * sec[i - 1] * sec[i] / (sec[i - 1] + sec[i])
                 : 0.0;
  }

  const auto cdf = [&](double xx) -> double {
    if (xx <= t.front()) return 0.0;
    if (xx >= t.back()) return y.back();
    int lo = 0, hi = p - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (t[mid] <= xx ? lo : hi) = mid;
    }
    const double w = t[lo + 1] - t[lo];
    const double s = (xx - t[lo]) / w;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * y[lo] + h10 * w * d[lo] + h01 * y[lo + 1] + h11 * w * d[lo + 1];
  };

  std::vector<double> rho(grid.n_cells);
  double prev_mass = 0.0;  // cdf(grid.left)
  for (int j = 0; j < grid.n_cells; ++j) {
    const double next_mass =
        (j + 1 == grid.n_cells) ? y.back() : cdf(grid.cell_left(j + 1));
    rho[j] = std::max(0.0, (next_mass - prev_mass) / h);
    prev_mass = next_mass;
  }
  return DiscreteMeasure(grid, std::move(rho));
}

double bv_seminorm(const DiscreteMeasure& m) {
  double s = 0.0;
  for (size_t i = 0; i + 1 < m.density.size(); ++i)
    s += std::abs(m.density[i + 1] - m.density[i]);
  return s;
}

double linf(const DiscreteMeasure& m) {
  double s = 0.0;
  for (double v : m.density) s = std::max(s, v);
  return s;
}

double l1_dist(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_same_grid(a, b, "l1_dist");
  double s = 0.0;
  for (size_t i = 0; i < a.density.size(); ++i)
    s += std::abs(a.density[i] - b.density[i]);
  return a.grid.h() * s;
}

DiscreteMeasure rescale(const DiscreteMeasure& m, double factor) {
  require(factor >= 0.0, ErrorCode::bad_parameter, "rescale factor >= 0");
  std::vector<double> rho(m.density);
  for (double& v : rho) v *= factor;
  return DiscreteMeasure(m.grid, std::move(rho));
}

void check_same_grid(const DiscreteMeasure& a, const DiscreteMeasure& b,
                     const char* where) {
  require(a.grid == b.grid, ErrorCode::grid_mismatch,
          std::string(where) + " requires measures on the same grid");
}

}  // namespace kfr
