#pragma once

#include <functional>
#include <vector>

#include "kfr/errors.hpp"

namespace kfr {

/// Uniform cell-centered 1D grid on [left, right].
struct Grid {
  double left = 0.0;
  double right = 1.0;
  int n_cells = 2;

  Grid() = default;
  Grid(double left_, double right_, int n_cells_);

  double h() const { return (right - left) / n_cells; }
  double cell_center(int i) const { return left + (i + 0.5) * h(); }
  double cell_left(int i) const { return left + i * h(); }

  bool operator==(const Grid& other) const = default;
};

/// Nonnegative density given by cell averages on a uniform grid. Vacuum
/// cells (zero density) are legal everywhere except Lagrangian conversion
/// of an all-zero measure.
struct DiscreteMeasure {
  Grid grid;
  std::vector<double> density;  // size grid.n_cells, all >= 0

  DiscreteMeasure() = default;
  DiscreteMeasure(Grid g, std::vector<double> density_);
};

/// Monotone particle positions at equal mass quanta (quantile coordinates).
struct LagrangianRep {
  double mass_quantum = 0.0;       // delta_m > 0
  std::vector<double> positions;   // strictly increasing
};

struct SampledMeasure {
  DiscreteMeasure measure;
  bool clamped_negative = false;  // true when samples below 0 were clipped
};

SampledMeasure measure_from_fn(const Grid& grid,
                               const std::function<double(double)>& f);

double total_mass(const DiscreteMeasure& m);

/// Invert the piecewise-linear CDF of m at mass levels (k+1/2)*delta_m.
/// Throws ZeroMass when total_mass(m) == 0.
LagrangianRep to_lagrangian(const DiscreteMeasure& m, int n_particles);

/// Conservative deposition: each particle's quantum is spread uniformly over
/// the interval between the midpoints with its neighbours, then cell-averaged.
/// Throws OutOfDomain when a position escapes [left, right] by more than h.
DiscreteMeasure from_lagrangian(const LagrangianRep& rep, const Grid& grid);

/// Sum of interior jumps |rho[i+1] - rho[i]| (no boundary terms).
double bv_seminorm(const DiscreteMeasure& m);
double linf(const DiscreteMeasure& m);
double l1_dist(const DiscreteMeasure& a, const DiscreteMeasure& b);

DiscreteMeasure rescale(const DiscreteMeasure& m, double factor);

void check_same_grid(const DiscreteMeasure& a, const DiscreteMeasure& b,
                     const char* where);

}  // namespace kfr
