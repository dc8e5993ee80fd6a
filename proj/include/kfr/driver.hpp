#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kfr/energy.hpp"
#include "kfr/fr_step.hpp"
#include "kfr/grid.hpp"
#include "kfr/mk_step.hpp"

namespace kfr {

struct SchemeParams {
  double tau = 1e-2;
  double t_final = 0.1;
  bool mk_enabled = true;
  bool fr_enabled = true;
  MkSolverOptions mk_opts;
  FrSolverOptions fr_opts;
  /// Retain at most this many step states (0 = all). Beyond the cap, only
  /// every k-th half/full state is kept; reports are always kept.
  int max_retained_states = 0;
};

struct TrajectoryStep {
  int index = 0;  // n, counting from 0
  std::optional<DiscreteMeasure> half;  // rho^{n+1/2}
  std::optional<DiscreteMeasure> full;  // rho^{n+1}
  double mass_half = 0.0;
  double mass_full = 0.0;
  StepReport mk_report;
  StepReport fr_report;
};

struct Trajectory {
  SchemeParams params;
  DiscreteMeasure initial;
  std::vector<TrajectoryStep> steps;
  bool failed = false;
  std::string failure_message;

  int n_steps() const { return static_cast<int>(steps.size()); }
};

/// Run the splitting scheme rho^n ->(MK)-> rho^{n+1/2} ->(FR)-> rho^{n+1}
/// for ceil(t_final/tau) steps. Substep errors mark the trajectory failed
/// and stop the run, keeping what was computed.
Trajectory run_splitting(const DiscreteMeasure& rho0, const EnergySpec& spec,
                         const SchemeParams& params);

/// The pair (rho~^tau(t), rho^tau(t)) of piecewise-constant interpolants;
/// t = 0 returns (rho0, rho0).
std::pair<DiscreteMeasure, DiscreteMeasure> interpolants(const Trajectory& traj,
                                                         double t);

struct DistanceBudget {
  double sum_mk_sq = 0.0;  // sum of per-step MK^2
  double sum_fr_sq = 0.0;  // sum of per-step FR^2
  double bound = 0.0;      // 2 (F(rho0) - inf F)
  double inf_f = 0.0;      // lower bound used for F
  bool satisfied = false;  // (sum_mk_sq+sum_fr_sq)/tau <= bound*(1+1e-6)+1e-8
  std::vector<std::string> warnings;
};

/// Accumulated total-square-distance sums against 2(F(rho0) - inf F).
/// inf F defaults to 0 for catalog-(H) internals with Psi, K >= 0 and to
/// spec.inf_f_override otherwise (warning when the fallback 0 is used).
DistanceBudget total_square_distance_report(const Trajectory& traj,
                                            const EnergySpec& spec);

/// Total mass of rho^{n+1} per step, preceded by the initial mass.
std::vector<double> mass_curve(const Trajectory& traj);

}  // namespace kfr
