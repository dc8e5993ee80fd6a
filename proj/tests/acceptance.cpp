// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit status is the number of failed criteria.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kfr/diagnostics.hpp"
#include "kfr/driver.hpp"
#include "kfr/metrics.hpp"

using namespace kfr;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", number,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

DiscreteMeasure gaussian_bump(const Grid& g, double center, double width,
                              double height) {
  return measure_from_fn(g, [&](double x) {
           const double z = (x - center) / width;
           return height * std::exp(-z * z);
         })
      .measure;
}

std::vector<double> quadratic_well(const Grid& g) {
  std::vector<double> psi(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i) {
    const double x = g.cell_center(i);
    psi[i] = 0.5 * x * x;
  }
  return psi;
}

std::vector<double> gaussian_kernel(const Grid& g, double sigma) {
  std::vector<double> k(g.n_cells);
  for (int d = 0; d < g.n_cells; ++d) {
    const double z = d * g.h() / sigma;
    k[d] = std::exp(-0.5 * z * z);
  }
  return k;
}

struct MatrixCase {
  std::string label;
  EnergySpec spec;
  DiscreteMeasure rho0;
  bool plain;  // Psi = K = 0 (BV/Linf invariants apply)
  bool signed_ok;  // Psi, K >= 0 (pointwise domination applies)
};

// The config matrix shared by criteria 1, 2 and 6:
// U in {rho^2, rho^3/2, 0} x Psi in {0, x^2/2} x K in {0, gaussian},
// with bump and uniform data.
std::vector<MatrixCase> build_matrix(const Grid& g) {
  std::vector<MatrixCase> cases;
  const std::vector<std::pair<std::string, InternalEnergy>> internals = {
      {"U=rho^2", InternalEnergy::quadratic()},
      {"U=rho^3/2", InternalEnergy::power(3.0)},
      {"U=0", InternalEnergy::zero()}};
  for (const auto& [uname, internal] : internals) {
    for (int with_psi : {0, 1}) {
      for (int with_kernel : {0, 1}) {
        for (const char* data : {"bump", "uniform"}) {
          MatrixCase c{uname, EnergySpec{}, DiscreteMeasure{}, false, true};
          c.spec.internal = internal;
          if (with_psi) {
            c.spec.psi = quadratic_well(g);
            c.label += " Psi=x^2/2";
          }
          if (with_kernel) {
            c.spec.kernel = gaussian_kernel(g, 0.3);
            c.label += " K=gauss";
          }
          c.plain = !with_psi && !with_kernel;
          c.label += std::string(" data=") + data;
          c.rho0 = std::string(data) == "bump"
                       ? gaussian_bump(g, 0.1, 0.3, 1.0)
                       : DiscreteMeasure(
                             g, std::vector<double>(g.n_cells, 1.0));
          cases.push_back(std::move(c));
        }
      }
    }
  }
  return cases;
}

SchemeParams matrix_params() {
  SchemeParams params;
  params.tau = 5e-3;
  params.t_final = 0.05;
  params.mk_opts.grad_tol = 2e-3;
  params.mk_opts.n_particles = 16 * 128;
  params.fr_opts.newton_tol = 1e-11;
  params.fr_opts.interaction_mode = FrSolverOptions::InteractionMode::fixed_point;
  params.fr_opts.outer_tol = 1e-12;
  return params;
}

struct MatrixRun {
  MatrixCase c;
  Trajectory traj;
};

std::vector<MatrixRun> run_matrix() {
  const Grid g(-1.0, 1.0, 128);
  std::vector<MatrixRun> runs;
  for (MatrixCase& c : build_matrix(g)) {
    Trajectory traj = run_splitting(c.rho0, c.spec, matrix_params());
    runs.push_back({std::move(c), std::move(traj)});
  }
  return runs;
}

void criterion_1_substep_inequalities(const std::vector<MatrixRun>& runs) {
  bool pass = true;
  std::string detail = "24 configs";
  for (const MatrixRun& run : runs) {
    if (run.traj.failed) {
      pass = false;
      detail = run.c.label + ": " + run.traj.failure_message;
      break;
    }
    double mass_prev = total_mass(run.traj.initial);
    double energy_prev = energy(run.traj.initial, run.c.spec);
    const DiscreteMeasure* prev_full = &run.traj.initial;
    for (const TrajectoryStep& step : run.traj.steps) {
      // MK mass conservation, 1e-12 relative.
      if (mass_prev > 0.0 &&
          std::abs(step.mass_half - mass_prev) > 1e-12 * mass_prev) {
        pass = false;
        detail = run.c.label + ": MK mass drift";
      }
      // Chain energy monotonicity, 1e-8 slack per substep.
      if (step.mk_report.energy_after > energy_prev + 1e-8 ||
          step.fr_report.energy_after > step.mk_report.energy_after + 1e-8) {
        pass = false;
        detail = run.c.label + ": energy chain violated at step " +
                 std::to_string(step.index);
      }
      const DiscreteMeasure& half = *step.half;
      const DiscreteMeasure& full = *step.full;
      // FR pointwise domination for Psi, K >= 0 (exact).
      if (run.c.signed_ok) {
        for (int i = 0; i < half.grid.n_cells; ++i)
          if (full.density[i] > half.density[i]) {
            pass = false;
            detail = run.c.label + ": FR domination violated";
          }
      }
      // Linf/BV no-increase for convex U with Psi = K = 0; the absolute
      // 1e-8 floor absorbs solver roundoff on exactly-flat states.
      if (run.c.plain) {
        const double slack = 1.0 + 5.0 * half.grid.h();
        if (linf(half) > linf(*prev_full) * slack + 1e-8 ||
            bv_seminorm(half) > bv_seminorm(*prev_full) * slack + 1e-8) {
          pass = false;
          detail = run.c.label + ": MK Linf/BV grew beyond (1+5h)";
        }
        if (linf(full) > linf(half) + 1e-12 ||
            bv_seminorm(full) > bv_seminorm(half) + 1e-10) {
          pass = false;
          detail = run.c.label + ": FR Linf/BV grew";
        }
      }
      mass_prev = step.mass_full;
      energy_prev = step.fr_report.energy_after;
      prev_full = &*step.full;
    }
    if (!pass) break;
  }
  report(1, "substep inequalities over the config matrix", pass, detail);
}

void criterion_2_total_square_distance(const std::vector<MatrixRun>& runs) {
  bool pass = true;
  std::string detail = "bound 2(F(rho0) - inf F)";
  for (const MatrixRun& run : runs) {
    const DistanceBudget b = total_square_distance_report(run.traj, run.c.spec);
    const double lhs = (b.sum_mk_sq + b.sum_fr_sq) / run.traj.params.tau;
    if (!(lhs <= b.bound * (1.0 + 1e-6) + 1e-8)) {
      pass = false;
      detail = run.c.label + ": " + std::to_string(lhs) + " > " +
               std::to_string(b.bound);
      break;
    }
  }
  report(2, "total-square-distance estimate", pass, detail);
}

void criterion_3_edi() {
  const Grid g(-1.0, 1.0, 128);
  const DiscreteMeasure rho0 = gaussian_bump(g, 0.0, 0.3, 1.0);
  EnergySpec spec;
  spec.internal = InternalEnergy::quadratic();
  const double f0 = energy(rho0, spec);

  bool pass = true;
  std::string detail;
  double worst = 0.0;
  for (double tau : {1e-2, 1e-3}) {
    SchemeParams params;
    params.tau = tau;
    params.t_final = 0.1;
    params.mk_opts.grad_tol = 1e-9;
    params.mk_opts.n_particles = 16 * g.n_cells;
    const Trajectory traj = run_splitting(rho0, spec, params);
    if (traj.failed) {
      pass = false;
      detail = traj.failure_message;
      break;
    }
    const EdiReport rep =
        edi_report(traj, spec, {0.0, 0.02, 0.04, 0.06, 0.08, 0.1});
    for (const EdiEntry& e : rep.entries) {
      worst = std::min(worst, e.slack);
      if (e.slack < -1e-6 * f0) pass = false;
    }
  }
  if (detail.empty())
    detail = "min slack " + std::to_string(worst) + " vs -1e-6*F0 = " +
             std::to_string(-1e-6 * f0);
  report(3, "energy dissipation inequality", pass, detail);
}

void criterion_4_reaction_exactness() {
  const Grid g(0.0, 1.0, 16);
  const DiscreteMeasure one(g, std::vector<double>(g.n_cells, 1.0));
  EnergySpec spec;
  spec.internal = InternalEnergy::quadratic();

  bool pass = true;
  double errors[2];
  int idx = 0;
  for (double tau : {1e-2, 5e-3}) {
    SchemeParams params;
    params.tau = tau;
    params.t_final = 0.5;
    params.mk_enabled = false;
    const Trajectory traj = run_splitting(one, spec, params);
    const DiscreteMeasure final_state = interpolants(traj, 0.5).second;
    const double exact = 1.0 / (1.0 + 2.0 * 0.5);
    double err = 0.0;
    for (double v : final_state.density)
      err = std::max(err, std::abs(v - exact));
    if (err > 0.6 * tau) pass = false;
    errors[idx++] = err;
  }
  const double ratio = errors[0] / errors[1];
  if (!(ratio >= 1.7 && ratio <= 2.3)) pass = false;
  report(4, "reaction-only first-order exactness", pass,
         "Linf errors " + std::to_string(errors[0]) + ", " +
             std::to_string(errors[1]) + ", ratio " + std::to_string(ratio));
}

void criterion_5_oracle_agreement() {
  const Grid g(-1.0, 1.0, 200);
  const DiscreteMeasure rho0 = gaussian_bump(g, 0.0, 0.35, 1.0);
  EnergySpec spec;
  spec.internal = InternalEnergy::quadratic();
  spec.psi = quadratic_well(g);

  OracleParams oracle;
  oracle.dt = 0.45 * oracle_stable_dt(rho0, spec);
  const OracleResult ref = fd_reference(rho0, spec, 0.1, oracle);
  const DiscreteMeasure& ref_state = ref.snapshots.back().state;
  const double ref_mass = total_mass(ref_state);

  bool pass = true;
  std::vector<double> errors;
  for (double tau : {4e-3, 2e-3, 1e-3}) {
    SchemeParams params;
    params.tau = tau;
    params.t_final = 0.1;
    params.mk_opts.grad_tol = 1e-7;
    const Trajectory traj = run_splitting(rho0, spec, params);
    if (traj.failed) {
      pass = false;
      break;
    }
    const DiscreteMeasure final_state = interpolants(traj, 0.1).second;
    errors.push_back(l1_dist(final_state, ref_state) / ref_mass);
  }
  std::string detail = "relative L1 errors";
  for (double e : errors) detail += " " + std::to_string(e);
  if (errors.size() != 3) {
    pass = false;
  } else {
    if (errors[2] > 0.05) pass = false;
    if (!(errors[0] > errors[1] && errors[1] > errors[2])) pass = false;
  }
  report(5, "full scheme vs finite-difference oracle", pass, detail);
}

void criterion_6_el_residuals(const std::vector<MatrixRun>& runs) {
  bool pass = true;
  std::string detail;
  double worst_mk = 0.0, worst_fr = 0.0;
  const SchemeParams params = matrix_params();
  for (const MatrixRun& run : runs) {
    for (const TrajectoryStep& step : run.traj.steps) {
      worst_mk = std::max(worst_mk, step.mk_report.el_residual);
      worst_fr = std::max(worst_fr, step.fr_report.el_residual);
      if (step.mk_report.el_residual > 10.0 * params.mk_opts.grad_tol) {
        pass = false;
        detail = run.c.label + ": MK residual " +
                 std::to_string(step.mk_report.el_residual);
      }
      if (step.fr_report.el_residual > 10.0 * params.fr_opts.newton_tol) {
        pass = false;
        detail = run.c.label + ": FR residual " +
                 std::to_string(step.fr_report.el_residual);
      }
    }
    if (!pass) break;
  }
  if (detail.empty())
    detail = "max MK " + std::to_string(worst_mk) + " vs " +
             std::to_string(10.0 * params.mk_opts.grad_tol) + "; max FR " +
             std::to_string(worst_fr) + " vs " +
             std::to_string(10.0 * params.fr_opts.newton_tol);
  report(6, "Euler-Lagrange residuals on accepted steps", pass, detail);
}

void criterion_7_metric_identities() {
  bool pass = true;
  std::string detail = "all identities";

  {
    Grid g(0.0, 1.0, 64);
    DiscreteMeasure one(g, std::vector<double>(64, 1.0));
    DiscreteMeasure four(g, std::vector<double>(64, 4.0));
    if (std::abs(fr_distance_sq(one, four) - 4.0) > 1e-12) {
      pass = false;
      detail = "fr(1,4) != 4";
    }
  }
  if (std::abs(kfr_dirac_sq({0.0, 1.0}, {std::numbers::pi, 1.0}) - 8.0) >
      1e-9) {
    pass = false;
    detail = "dirac pi != 8";
  }
  {
    const double s = 0.25;
    Grid ga(0.0, 1.0, 128), gb(s, 1.0 + s, 128);
    DiscreteMeasure a(ga, std::vector<double>(128, 1.0));
    DiscreteMeasure b(gb, std::vector<double>(128, 1.0));
    const double got = mk_distance_sq(a, b, 2048);
    if (std::abs(got - s * s) > 0.01 * s * s) {
      pass = false;
      detail = "mk shifted uniforms off by >1%";
    }
  }
  {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    Grid g(0.0, 2.0, 40);
    for (int trial = 0; trial < 5 && pass; ++trial) {
      std::vector<double> ra(g.n_cells), rb(g.n_cells);
      for (double& v : ra) v = unif(rng);
      for (double& v : rb) v = unif(rng);
      DiscreteMeasure a(g, ra), b(g, rb);
      DiscreteMeasure beq = rescale(b, total_mass(a) / total_mass(b));
      if (std::abs(mk_distance_sq(a, beq, 512) -
                   mk_distance_sq(beq, a, 512)) > 1e-14 ||
          fr_distance_sq(a, b) != fr_distance_sq(b, a)) {
        pass = false;
        detail = "symmetry violated";
      }
      const double alpha = 0.4 + unif(rng);
      const double mk1 = mk_distance_sq(a, beq, 512);
      const double mk2 = mk_distance_sq(rescale(a, alpha), rescale(beq, alpha), 512);
      if (std::abs(mk2 - alpha * mk1) > 1e-10 * std::max(1.0, alpha * mk1)) {
        pass = false;
        detail = "mk scaling violated";
      }
      const double fr1 = fr_distance_sq(a, b);
      const double fr2 = fr_distance_sq(rescale(a, alpha), rescale(b, alpha));
      if (std::abs(fr2 - alpha * fr1) > 1e-10 * std::max(1.0, alpha * fr1)) {
        pass = false;
        detail = "fr scaling violated";
      }
      DiracMass p{0.3, unif(rng)}, q{1.1, unif(rng)};
      const double d1 = kfr_dirac_sq(p, q);
      const double d2 =
          kfr_dirac_sq({p.position, alpha * p.weight}, {q.position, alpha * q.weight});
      if (std::abs(d2 - alpha * d1) > 1e-10 * std::max(1.0, alpha * d1)) {
        pass = false;
        detail = "dirac scaling violated";
      }
    }
  }
  report(7, "metric identities", pass, detail);
}

void criterion_8_leg_bound_ratio() {
  const Grid g(-1.0, 1.0, 1000);
  bool pass = true;
  std::string detail = "ratios";
  for (double s : {0.1, 0.2, 0.4}) {
    DiscreteMeasure a = gaussian_bump(g, -s / 2, 0.02, 1.0);
    DiscreteMeasure b = gaussian_bump(g, s / 2, 0.02, 1.0);
    b = rescale(b, total_mass(a) / total_mass(b));
    const double m = total_mass(a);
    const double ratio = kfr_upper_bound_sq(a, b, 4096) /
                         kfr_dirac_sq({-s / 2, m}, {s / 2, m});
    detail += " " + std::to_string(ratio);
    if (!(ratio >= 1.8 && ratio <= 2.2)) pass = false;
  }
  report(8, "leg-bound uncoupling ratio", pass, detail);
}

void criterion_9_gateaux() {
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> unif(0.1, 1.2);
  const Grid g(-1.0, 1.0, 32);

  std::vector<EnergySpec> catalog;
  for (int which = 0; which < 5; ++which) {
    EnergySpec spec;
    switch (which) {
      case 0: spec.internal = InternalEnergy::quadratic(); break;
      case 1: spec.internal = InternalEnergy::power(3.0); break;
      case 2: spec.internal = InternalEnergy::power(1.7); break;
      case 3: spec.internal = InternalEnergy::zero(); break;
      case 4: spec.internal = InternalEnergy::boltzmann(); break;
    }
    spec.psi = quadratic_well(g);
    spec.kernel = gaussian_kernel(g, 0.4);
    catalog.push_back(std::move(spec));
  }

  bool pass = true;
  std::string detail = "5 catalog energies x 3 random densities";
  for (const EnergySpec& spec : catalog) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> rho(g.n_cells), dir(g.n_cells);
      for (double& v : rho) v = unif(rng);
      for (double& v : dir) v = unif(rng) - 0.6;
      const double eps = 1e-5;
      std::vector<double> up(rho), dn(rho);
      for (int i = 0; i < g.n_cells; ++i) {
        up[i] += eps * dir[i];
        dn[i] -= eps * dir[i];
      }
      const double fd = (energy(DiscreteMeasure(g, up), spec) -
                         energy(DiscreteMeasure(g, dn), spec)) /
                        (2.0 * eps);
      const auto fv = first_variation(DiscreteMeasure(g, rho), spec);
      double pairing = 0.0;
      for (int i = 0; i < g.n_cells; ++i) pairing += g.h() * fv[i] * dir[i];
      if (std::abs(fd - pairing) > 1e-6 * std::max(1.0, std::abs(pairing))) {
        pass = false;
        detail = spec.internal.name() + ": fd " + std::to_string(fd) +
                 " vs pairing " + std::to_string(pairing);
      }
    }
  }
  report(9, "energy/first-variation Gateaux consistency", pass, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  const std::vector<MatrixRun> runs = run_matrix();
  criterion_1_substep_inequalities(runs);
  criterion_2_total_square_distance(runs);
  criterion_3_edi();
  criterion_4_reaction_exactness();
  criterion_5_oracle_agreement();
  criterion_6_el_residuals(runs);
  criterion_7_metric_identities();
  criterion_8_leg_bound_ratio();
  criterion_9_gateaux();
  if (failures == 0)
    std::printf("all criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", failures);
  return failures;
}
