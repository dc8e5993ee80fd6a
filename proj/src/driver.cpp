#include "kfr/driver.hpp"

#include <algorithm>
#include <cmath>

#include "kfr/metrics.hpp"

namespace kfr {

Trajectory run_splitting(const DiscreteMeasure& rho0, const EnergySpec& spec,
                         const SchemeParams& params) {
  require(params.tau > 0.0, ErrorCode::bad_parameter, "tau must be positive");
  require(params.t_final >= params.tau, ErrorCode::bad_parameter,
          "t_final must be at least tau");
  require(params.mk_enabled || params.fr_enabled, ErrorCode::bad_parameter,
          "at least one substep must be enabled");
  check_spec_compatible(spec, rho0.grid, "run_splitting");
  const double f0 = energy(rho0, spec);
  require(std::isfinite(f0), ErrorCode::bad_parameter,
          "F(rho0) must be finite");

  Trajectory traj;
  traj.params = params;
  traj.initial = rho0;

  const int n_steps =
      static_cast<int>(std::ceil(params.t_final / params.tau - 1e-12));
  const int cap = params.max_retained_states;
  const int stride =
      (cap > 0 && n_steps > cap) ? (n_steps + cap - 1) / cap : 1;

  DiscreteMeasure current = rho0;
  for (int n = 0; n < n_steps; ++n) {
    TrajectoryStep step;
    step.index = n;

    DiscreteMeasure half = current;
    try {
      if (params.mk_enabled && total_mass(current) > 0.0) {
        auto [out, rep] = mk_jko_step(current, spec, params.tau, params.mk_opts);
        half = std::move(out);
        step.mk_report = std::move(rep);
      } else {
        step.mk_report.kind = SubstepKind::mk;
        step.mk_report.energy_before = energy(current, spec);
        step.mk_report.energy_after = step.mk_report.energy_before;
      }

      DiscreteMeasure full = half;
      if (params.fr_enabled) {
        auto [out, rep] = fr_jko_step(half, spec, params.tau, params.fr_opts);
        full = std::move(out);
        step.fr_report = std::move(rep);
      } else {
        step.fr_report.kind = SubstepKind::fr;
        step.fr_report.energy_before = energy(half, spec);
        step.fr_report.energy_after = step.fr_report.energy_before;
      }

      step.mass_half = total_mass(half);
      step.mass_full = total_mass(full);
      const bool keep = (n % stride == 0) || (n + 1 == n_steps);
      if (keep) {
        step.half = half;
        step.full = full;
      }
      current = std::move(full);
      traj.steps.push_back(std::move(step));
    } catch (const Error& e) {
      traj.failed = true;
      traj.failure_message = e.what();
      break;
    }
  }
  return traj;
}

std::pair<DiscreteMeasure, DiscreteMeasure> interpolants(const Trajectory& traj,
                                                         double t) {
  const double tau = traj.params.tau;
  require(t >= 0.0 && t <= traj.n_steps() * tau * (1.0 + 1e-12),
          ErrorCode::out_of_range, "time outside the computed trajectory");
  if (t <= 0.0) return {traj.initial, traj.initial};

  // t in (n*tau, (n+1)*tau] belongs to the pair computed by step n.
  int n = static_cast<int>(std::ceil(t / tau - 1e-12)) - 1;
  n = std::clamp(n, 0, traj.n_steps() - 1);
  const TrajectoryStep& step = traj.steps[n];
  require(step.half.has_value() && step.full.has_value(),
          ErrorCode::out_of_range,
          "state was thinned out by the retention cap; rerun with a larger "
          "max_retained_states");
  return {*step.half, *step.full};
}

DistanceBudget total_square_distance_report(const Trajectory& traj,
                                            const EnergySpec& spec) {
  DistanceBudget budget;
  for (const TrajectoryStep& step : traj.steps) {
    budget.sum_mk_sq += step.mk_report.dist_sq_moved;
    budget.sum_fr_sq += step.fr_report.dist_sq_moved;
  }

  double inf_f = 0.0;
  if (spec.inf_f_override.has_value()) {
    inf_f = *spec.inf_f_override;
  } else {
    const bool psi_ok =
        !spec.has_psi() ||
        *std::min_element(spec.psi.begin(), spec.psi.end()) >= 0.0;
    const bool kernel_ok =
        !spec.has_kernel() ||
        *std::min_element(spec.kernel.begin(), spec.kernel.end()) >= 0.0;
    if (!(spec.internal.catalog_h() && psi_ok && kernel_ok))
      budget.warnings.push_back(
          "inf F = 0 not certified by sign conditions; supply "
          "inf_f_override for a sharp bound");
  }
  budget.inf_f = inf_f;

  const double f0 = energy(traj.initial, spec);
  budget.bound = 2.0 * (f0 - inf_f);
  const double lhs = (budget.sum_mk_sq + budget.sum_fr_sq) / traj.params.tau;
  budget.satisfied = lhs <= budget.bound * (1.0 + 1e-6) + 1e-8;
  if (!budget.satisfied)
    budget.warnings.push_back("total-square-distance bound violated");
  return budget;
}

std::vector<double> mass_curve(const Trajectory& traj) {
  std::vector<double> masses;
  masses.reserve(traj.steps.size() + 1);
  masses.push_back(total_mass(traj.initial));
  for (const TrajectoryStep& step : traj.steps) masses.push_back(step.mass_full);
  return masses;
}

}  // namespace kfr
