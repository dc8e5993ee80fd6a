#pragma once

#include <utility>
#include <vector>

#include "kfr/energy.hpp"
#include "kfr/grid.hpp"
#include "kfr/step_report.hpp"

namespace kfr {

struct MkSolverOptions {
  int n_particles = 0;  // <= 0 resolves to 4 * n_cells
  int max_iters = 200;
  double grad_tol = 1e-8;        // mass-weighted l2 stationarity tolerance
  double monotonicity_eps = 1e-6;  // minimal particle gap, fraction of h

  int resolved_particles(int n_cells) const {
    return n_particles > 0 ? n_particles : 4 * n_cells;
  }
};

/// One Monge-Kantorovich JKO substep, solved as a convex minimization over
/// monotone particle positions (projected damped Newton, gradient fallback).
std::pair<DiscreteMeasure, StepReport> mk_jko_step(const DiscreteMeasure& mu,
                                                   const EnergySpec& spec,
                                                   double tau,
                                                   const MkSolverOptions& opts);

/// Mass-weighted l2 norm of (X*_k - X0_k)/tau + dF'(rho*)/dx at the
/// particles, with the gradient of F' formed by centered differences on the
/// grid. Quantiles of mu and rho_star share opts.n_particles.
double mk_el_residual(const DiscreteMeasure& mu, const DiscreteMeasure& rho_star,
                      double tau, const EnergySpec& spec,
                      const MkSolverOptions& opts);

struct TaylorCheck {
  double lhs = 0.0;        // int (rho* - mu) phi
  double rhs = 0.0;        // -tau int grad F'(rho*) . grad phi drho*
  double remainder = 0.0;  // lhs - rhs
};

/// Both sides of the approximate Euler-Lagrange identity for a test
/// function sampled on the grid, plus their difference.
TaylorCheck taylor_remainder_check(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& rho_star, double tau,
                                   const EnergySpec& spec,
                                   const std::vector<double>& phi);

/// Second-order finite-difference gradient of grid samples (centered in the
/// interior, one-sided at the ends).
std::vector<double> grid_gradient(const std::vector<double>& values, double h);

}  // namespace kfr
