#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kfr/driver.hpp"
#include "kfr/energy.hpp"
#include "kfr/grid.hpp"

namespace kfr {

/// Explicit conservative finite-volume oracle for
/// dt rho = div(rho grad F'(rho)) - rho F'(rho): central face averages for
/// rho, centered differences for grad F', zero-flux boundary faces,
/// pointwise explicit reaction. Structurally independent of the variational
/// scheme.
struct OracleParams {
  double dt = 1e-5;
  std::vector<double> snapshot_times;  // sorted; t_final is always appended
  bool flux_enabled = true;
  bool reaction_enabled = true;
};

struct OracleSnapshot {
  double t = 0.0;
  DiscreteMeasure state;
};

struct OracleResult {
  std::vector<OracleSnapshot> snapshots;
  long clip_events = 0;  // negative densities clipped to zero
};

/// Explicit stability restriction dt <= h^2 / (2 max rho U'') estimated
/// from the data; violating it is a StabilityViolation.
double oracle_stable_dt(const DiscreteMeasure& rho0, const EnergySpec& spec);

OracleResult fd_reference(const DiscreteMeasure& rho0, const EnergySpec& spec,
                          double t_final, const OracleParams& params);

enum class Norm { l1, linf };

struct CompareRow {
  double t = 0.0;
  double error = 0.0;
};

/// Per-time errors between two snapshot lists. Grids must match or be
/// nested (the finer is restricted by cell averaging).
std::vector<CompareRow> compare(const std::vector<OracleSnapshot>& a,
                                const std::vector<OracleSnapshot>& b,
                                const std::vector<double>& times, Norm norm);

struct EdiEntry {
  double t1 = 0.0, t2 = 0.0;
  double f_t1 = 0.0, f_t2 = 0.0;
  double dissipation_integral = 0.0;
  double slack = 0.0;  // f_t1 - f_t2 - dissipation_integral
};

struct EdiReport {
  std::vector<EdiEntry> entries;
  bool hypotheses_certified = false;  // Prop-style convexity checks passed
};

/// Energy dissipation audit over checkpoint intervals: the dissipation is
/// the per-step sum tau [ h sum (dx U'(half))^2 half + h sum U'(full)^2 full ]
/// with centered differences and left-endpoint quadrature.
EdiReport edi_report(const Trajectory& traj, const EnergySpec& spec,
                     const std::vector<double>& checkpoints);

struct StudyConfig {
  double left = -1.0, right = 1.0;
  std::function<DiscreteMeasure(const Grid&)> initial;
  std::function<EnergySpec(const Grid&)> make_spec;
  double t_final = 0.1;
  SchemeParams scheme;       // tau is overridden per study row
  double oracle_dt_safety = 0.5;  // dt = safety * stability bound
  Norm norm = Norm::l1;
};

struct StudyRow {
  double tau = 0.0;
  double h = 0.0;
  Norm norm = Norm::l1;
  double error = 0.0;
  double observed_order = 0.0;  // log2 ratio vs previous tau at the same h; 0 for the first
};

/// Error matrix of the splitting scheme against the finite-difference
/// oracle on the finest grid; tau_list and n_cells_list sorted descending
/// and coarser grids must divide the finest.
std::vector<StudyRow> convergence_study(const StudyConfig& config,
                                        const std::vector<double>& tau_list,
                                        const std::vector<int>& n_cells_list);

}  // namespace kfr
