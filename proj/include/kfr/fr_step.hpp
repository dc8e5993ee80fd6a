#pragma once

#include <utility>

#include "kfr/energy.hpp"
#include "kfr/grid.hpp"
#include "kfr/step_report.hpp"

namespace kfr {

struct FrSolverOptions {
  double newton_tol = 1e-11;  // residual tolerance on s(1 + (tau/2)(U'+c)) - sqrt(mu)
  int max_newton_iters = 80;

  enum class InteractionMode { frozen, fixed_point };
  InteractionMode interaction_mode = InteractionMode::frozen;
  int max_outer = 40;        // fixed_point only
  double outer_tol = 1e-11;  // fixed_point only: sup-norm increment of K*rho

  bool allow_non_h = false;   // accept internal energies outside (H)
  bool cfl_override = false;  // run past tau >= 2/U'(linf)
};

/// Unique nonnegative minimizer of g(s) = (2/tau)(s - sqrt(mu_i))^2 + U(s^2)
/// + c_i s^2, returned as rho = s^2. Solved by safeguarded Newton on the
/// stationarity equation, bisection fallback inside the bracket.
double fr_pointwise_solve(double mu_i, double c_i, double tau,
                          const InternalEnergy& internal,
                          const FrSolverOptions& opts);

/// One Fisher-Rao JKO substep: independent per-cell solves in s = sqrt(rho).
std::pair<DiscreteMeasure, StepReport> fr_jko_step(const DiscreteMeasure& mu,
                                                   const EnergySpec& spec,
                                                   double tau,
                                                   const FrSolverOptions& opts);

/// l2 norm over cells of (rho* - mu) + tau * (sqrt(rho*)(sqrt(rho*) +
/// sqrt(mu))/2) * F'(rho*); zero exactly at the twisted Euler-Lagrange
/// stationarity.
double fr_el_residual(const DiscreteMeasure& mu, const DiscreteMeasure& rho_star,
                      double tau, const EnergySpec& spec);

}  // namespace kfr
