#include "kfr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kfr/mk_step.hpp"

namespace kfr {

double oracle_stable_dt(const DiscreteMeasure& rho0, const EnergySpec& spec) {
  const double h = rho0.grid.h();
  double max_diff = 0.0;
  for (double r : rho0.density)
    if (r > 0.0) max_diff = std::max(max_diff, r * spec.internal.second_deriv(r));
  if (max_diff <= 0.0) return std::numeric_limits<double>::infinity();
  return h * h / (2.0 * max_diff);
}

OracleResult fd_reference(const DiscreteMeasure& rho0, const EnergySpec& spec,
                          double t_final, const OracleParams& params) {
  require(params.dt > 0.0, ErrorCode::bad_parameter, "dt must be positive");
  require(t_final > 0.0, ErrorCode::bad_parameter, "t_final must be positive");
  check_spec_compatible(spec, rho0.grid, "fd_reference");
  const double stable = oracle_stable_dt(rho0, spec);
  require(params.dt <= stable * (1.0 + 1e-12), ErrorCode::stability_violation,
          "explicit oracle step exceeds h^2/(2 max rho U'')");

  const Grid& grid = rho0.grid;
  const int n = grid.n_cells;
  const double h = grid.h();

  std::vector<double> targets = params.snapshot_times;
  std::sort(targets.begin(), targets.end());
  if (targets.empty() || targets.back() < t_final - 1e-12)
    targets.push_back(t_final);

  OracleResult result;
  std::vector<double> rho = rho0.density;
  double t = 0.0;
  size_t next_target = 0;

  while (next_target < targets.size()) {
    const double target = std::min(targets[next_target], t_final);
    while (t < target - 1e-14) {
      const double dt = std::min(params.dt, target - t);
      const DiscreteMeasure cur(grid, rho);
      const std::vector<double> fv = first_variation(cur, spec);
      std::vector<double> next(rho);

      if (params.flux_enabled) {
        // Interior faces only: zero-flux boundary.
        // d_t rho_i = (1/h) [ (rho dx F')_{i+1/2} - (rho dx F')_{i-1/2} ].
        for (int f = 1; f < n; ++f) {
          const double rho_face = 0.5 * (rho[f - 1] + rho[f]);
          const double grad_face = (fv[f] - fv[f - 1]) / h;
          const double flux = rho_face * grad_face;
          next[f - 1] += dt / h * flux;
          next[f] -= dt / h * flux;
        }
      }
      if (params.reaction_enabled)
        for (int i = 0; i < n; ++i) next[i] -= dt * rho[i] * fv[i];

      for (int i = 0; i < n; ++i) {
        if (!std::isfinite(next[i]))
          raise(ErrorCode::blowup, "oracle produced a non-finite density");
        if (next[i] < 0.0) {
          next[i] = 0.0;
          ++result.clip_events;
        }
      }
      rho = std::move(next);
      t += dt;
    }
    result.snapshots.push_back({target, DiscreteMeasure(grid, rho)});
    ++next_target;
  }
  return result;
}

namespace {

DiscreteMeasure restrict_to(const DiscreteMeasure& fine, const Grid& coarse) {
  if (fine.grid == coarse) return fine;
  require(std::abs(fine.grid.left - coarse.left) < 1e-12 &&
              std::abs(fine.grid.right - coarse.right) < 1e-12 &&
              fine.grid.n_cells % coarse.n_cells == 0,
          ErrorCode::grid_mismatch,
          "compare requires matching or nested grids");
  const int k = fine.grid.n_cells / coarse.n_cells;
  std::vector<double> rho(coarse.n_cells, 0.0);
  for (int i = 0; i < coarse.n_cells; ++i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += fine.density[i * k + j];
    rho[i] = s / k;
  }
  return DiscreteMeasure(coarse, std::move(rho));
}

const OracleSnapshot& snapshot_at(const std::vector<OracleSnapshot>& list,
                                  double t) {
  for (const OracleSnapshot& s : list)
    if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
  raise(ErrorCode::out_of_range, "no snapshot recorded at the requested time");
}

double measure_error(const DiscreteMeasure& a, const DiscreteMeasure& b,
                     Norm norm) {
  if (norm == Norm::l1) return l1_dist(a, b);
  check_same_grid(a, b, "compare");
  double m = 0.0;
  for (size_t i = 0; i < a.density.size(); ++i)
    m = std::max(m, std::abs(a.density[i] - b.density[i]));
  return m;
}

}  // namespace

std::vector<CompareRow> compare(const std::vector<OracleSnapshot>& a,
                                const std::vector<OracleSnapshot>& b,
                                const std::vector<double>& times, Norm norm) {
  std::vector<CompareRow> rows;
  for (double t : times) {
    const OracleSnapshot& sa = snapshot_at(a, t);
    const OracleSnapshot& sb = snapshot_at(b, t);
    const Grid& target = sa.state.grid.n_cells <= sb.state.grid.n_cells
                             ? sa.state.grid
                             : sb.state.grid;
    rows.push_back({t, measure_error(restrict_to(sa.state, target),
                                     restrict_to(sb.state, target), norm)});
  }
  return rows;
}

EdiReport edi_report(const Trajectory& traj, const EnergySpec& spec,
                     const std::vector<double>& checkpoints) {
  require(checkpoints.size() >= 2, ErrorCode::bad_parameter,
          "edi_report needs at least two checkpoints");
  const double tau = traj.params.tau;
  const double h = traj.initial.grid.h();

  EdiReport report;
  {
    const HypothesisReport hyp =
        check_hypotheses(spec, std::max(1.0, linf(traj.initial)), 1);
    report.hypotheses_certified = hyp.satisfies_h &&
                                  hyp.mk_displacement_convex &&
                                  hyp.fr_convexity_lambda >= -1e-12 &&
                                  !spec.has_psi() && !spec.has_kernel();
  }

  // Per-step dissipation tau [ h sum (dx U'(half))^2 half + h sum U'(full)^2 full ].
  const auto step_dissipation = [&](const TrajectoryStep& step) {
    require(step.half.has_value() && step.full.has_value(),
            ErrorCode::out_of_range,
            "EDI needs retained states; rerun with a larger cap");
    const DiscreteMeasure& half = *step.half;
    const DiscreteMeasure& full = *step.full;
    std::vector<double> du(half.grid.n_cells);
    for (int i = 0; i < half.grid.n_cells; ++i)
      du[i] = spec.internal.deriv(half.density[i]);
    const std::vector<double> grad = grid_gradient(du, h);
    double mk_part = 0.0;
    for (int i = 0; i < half.grid.n_cells; ++i)
      if (half.density[i] > 0.0)
        mk_part += grad[i] * grad[i] * half.density[i];
    double fr_part = 0.0;
    for (int i = 0; i < full.grid.n_cells; ++i) {
      const double u = spec.internal.deriv(full.density[i]);
      if (full.density[i] > 0.0) fr_part += u * u * full.density[i];
    }
    return tau * h * (mk_part + fr_part);
  };

  const auto energy_at = [&](double t) {
    if (t <= 0.0) return energy(traj.initial, spec);
    return energy(interpolants(traj, t).second, spec);
  };
  const auto step_range = [&](double t1, double t2) {
    // Steps whose pair belongs to (t1, t2]: indices ceil(t1/tau)..ceil(t2/tau)-1.
    const int lo = static_cast<int>(std::ceil(t1 / tau - 1e-12));
    const int hi = static_cast<int>(std::ceil(t2 / tau - 1e-12));
    return std::pair<int, int>(lo, std::min(hi, traj.n_steps()));
  };

  for (size_t c = 0; c + 1 < checkpoints.size(); ++c) {
    EdiEntry entry;
    entry.t1 = checkpoints[c];
    entry.t2 = checkpoints[c + 1];
    require(entry.t2 > entry.t1, ErrorCode::bad_parameter,
            "checkpoints must be strictly increasing");
    entry.f_t1 = energy_at(entry.t1);
    entry.f_t2 = energy_at(entry.t2);
    const auto [lo, hi] = step_range(entry.t1, entry.t2);
    for (int nidx = lo; nidx < hi; ++nidx)
      entry.dissipation_integral += step_dissipation(traj.steps[nidx]);
    entry.slack = entry.f_t1 - entry.f_t2 - entry.dissipation_integral;
    report.entries.push_back(entry);
  }
  return report;
}

std::vector<StudyRow> convergence_study(const StudyConfig& config,
                                        const std::vector<double>& tau_list,
                                        const std::vector<int>& n_cells_list) {
  require(!tau_list.empty() && !n_cells_list.empty(), ErrorCode::bad_parameter,
          "study lists must be nonempty");
  require(std::is_sorted(tau_list.rbegin(), tau_list.rend()),
          ErrorCode::bad_parameter, "tau_list must be sorted descending");
  require(std::is_sorted(n_cells_list.rbegin(), n_cells_list.rend(),
                         std::less<int>()),
          ErrorCode::bad_parameter, "n_cells_list must be sorted descending");

  // Reference: finite-difference oracle on the finest grid.
  const int n_fine = n_cells_list.front();
  const Grid fine_grid(config.left, config.right, n_fine);
  const DiscreteMeasure rho0_fine = config.initial(fine_grid);
  const EnergySpec spec_fine = config.make_spec(fine_grid);

  OracleParams oracle;
  const double stable = oracle_stable_dt(rho0_fine, spec_fine);
  oracle.dt = std::isfinite(stable) ? config.oracle_dt_safety * stable : 1e-4;
  const OracleResult reference =
      fd_reference(rho0_fine, spec_fine, config.t_final, oracle);
  const DiscreteMeasure& ref_state = reference.snapshots.back().state;

  std::vector<StudyRow> rows;
  for (int n_cells : n_cells_list) {
    require(n_fine % n_cells == 0, ErrorCode::bad_parameter,
            "coarser grids must divide the finest");
    const Grid grid(config.left, config.right, n_cells);
    const DiscreteMeasure rho0 = config.initial(grid);
    const EnergySpec spec = config.make_spec(grid);
    const DiscreteMeasure ref_restricted = restrict_to(ref_state, grid);

    double prev_error = 0.0;
    for (size_t ti = 0; ti < tau_list.size(); ++ti) {
      SchemeParams params = config.scheme;
      params.tau = tau_list[ti];
      params.t_final = config.t_final;
      const Trajectory traj = run_splitting(rho0, spec, params);
      require(!traj.failed, ErrorCode::solver_failure,
              "study cell failed: " + traj.failure_message);

      StudyRow row;
      row.tau = tau_list[ti];
      row.h = grid.h();
      row.norm = config.norm;
      const DiscreteMeasure final_state = interpolants(traj, config.t_final).second;
      row.error = measure_error(final_state, ref_restricted, config.norm);
      if (ti > 0 && row.error > 0.0 && prev_error > 0.0)
        row.observed_order = std::log(prev_error / row.error) /
                             std::log(tau_list[ti - 1] / tau_list[ti]);
      prev_error = row.error;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace kfr
