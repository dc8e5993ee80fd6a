// Python bindings for the main solver operations.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kfr/config.hpp"
#include "kfr/diagnostics.hpp"
#include "kfr/driver.hpp"
#include "kfr/energy.hpp"
#include "kfr/fr_step.hpp"
#include "kfr/metrics.hpp"
#include "kfr/mk_step.hpp"

namespace py = pybind11;
using namespace kfr;

namespace {

py::dict report_to_dict(const StepReport& r) {
  py::dict d;
  d["kind"] = substep_name(r.kind);
  d["dist_sq_moved"] = r.dist_sq_moved;
  d["energy_before"] = r.energy_before;
  d["energy_after"] = r.energy_after;
  d["el_residual"] = r.el_residual;
  d["iterations"] = r.iterations;
  d["warnings"] = r.warnings;
  return d;
}

EnergySpec make_spec(const Grid& grid, const std::string& internal, double m,
                     const std::string& psi, const std::string& kernel,
                     double kernel_sigma) {
  RunConfig cfg;
  cfg.grid_left = grid.left;
  cfg.grid_right = grid.right;
  cfg.grid_n_cells = grid.n_cells;
  cfg.energy_internal = internal;
  cfg.energy_m = m;
  cfg.energy_psi = psi;
  cfg.energy_kernel = kernel;
  cfg.energy_kernel_sigma = kernel_sigma;
  return cfg.build_spec(grid);
}

}  // namespace

PYBIND11_MODULE(kfrflow, mod) {
  mod.doc() = "Kantorovich-Fisher-Rao splitting JKO solver";

  py::register_exception<Error>(mod, "KfrError");

  py::class_<Grid>(mod, "Grid")
      .def(py::init<double, double, int>(), py::arg("left"), py::arg("right"),
           py::arg("n_cells"))
      .def_readonly("left", &Grid::left)
      .def_readonly("right", &Grid::right)
      .def_readonly("n_cells", &Grid::n_cells)
      .def_property_readonly("h", &Grid::h)
      .def("cell_center", &Grid::cell_center);

  py::class_<DiscreteMeasure>(mod, "DiscreteMeasure")
      .def(py::init<Grid, std::vector<double>>(), py::arg("grid"),
           py::arg("density"))
      .def_readonly("grid", &DiscreteMeasure::grid)
      .def_readonly("density", &DiscreteMeasure::density);

  mod.def(
      "measure_from_fn",
      [](const Grid& g, const std::function<double(double)>& f) {
        return measure_from_fn(g, f).measure;
      },
      py::arg("grid"), py::arg("f"));
  mod.def("total_mass", &total_mass);
  mod.def("bv_seminorm", &bv_seminorm);
  mod.def("linf", &linf);
  mod.def("l1_dist", &l1_dist);

  mod.def("make_energy_spec", &make_spec, py::arg("grid"),
          py::arg("internal") = "quadratic", py::arg("m") = 2.0,
          py::arg("psi") = "zero", py::arg("kernel") = "zero",
          py::arg("kernel_sigma") = 0.3);
  mod.def("energy", &energy);
  mod.def("first_variation", &first_variation);
  mod.def("check_hypotheses", [](const EnergySpec& spec, double rho_max, int d) {
    const HypothesisReport rep = check_hypotheses(spec, rho_max, d);
    py::dict out;
    out["satisfies_H"] = rep.satisfies_h;
    out["mk_displacement_convex"] = rep.mk_displacement_convex;
    out["fr_convexity_lambda"] = rep.fr_convexity_lambda;
    out["notes"] = rep.notes;
    return out;
  });
  py::class_<EnergySpec>(mod, "EnergySpec");

  mod.def("mk_distance_sq", &mk_distance_sq, py::arg("a"), py::arg("b"),
          py::arg("n_particles") = 2048);
  mod.def("fr_distance_sq", &fr_distance_sq);
  mod.def(
      "kfr_dirac_sq",
      [](double k0, double x0, double k1, double x1) {
        return kfr_dirac_sq({x0, k0}, {x1, k1});
      },
      py::arg("k0"), py::arg("x0"), py::arg("k1"), py::arg("x1"));
  mod.def("kfr_upper_bound_sq", &kfr_upper_bound_sq, py::arg("a"), py::arg("b"),
          py::arg("n_particles") = 2048);
  mod.def("fr_geodesic", &fr_geodesic);

  mod.def(
      "fr_pointwise_solve",
      [](double mu_i, double c_i, double tau, const EnergySpec& spec) {
        return fr_pointwise_solve(mu_i, c_i, tau, spec.internal,
                                  FrSolverOptions{});
      },
      py::arg("mu_i"), py::arg("c_i"), py::arg("tau"), py::arg("spec"));

  mod.def(
      "mk_jko_step",
      [](const DiscreteMeasure& mu, const EnergySpec& spec, double tau) {
        auto [out, rep] = mk_jko_step(mu, spec, tau, MkSolverOptions{});
        return py::make_tuple(out, report_to_dict(rep));
      },
      py::arg("mu"), py::arg("spec"), py::arg("tau"));
  mod.def(
      "fr_jko_step",
      [](const DiscreteMeasure& mu, const EnergySpec& spec, double tau) {
        auto [out, rep] = fr_jko_step(mu, spec, tau, FrSolverOptions{});
        return py::make_tuple(out, report_to_dict(rep));
      },
      py::arg("mu"), py::arg("spec"), py::arg("tau"));

  mod.def(
      "run_splitting",
      [](const DiscreteMeasure& rho0, const EnergySpec& spec, double tau,
         double t_final, bool mk_enabled, bool fr_enabled) {
        SchemeParams params;
        params.tau = tau;
        params.t_final = t_final;
        params.mk_enabled = mk_enabled;
        params.fr_enabled = fr_enabled;
        const Trajectory traj = run_splitting(rho0, spec, params);
        if (traj.failed)
          throw Error(ErrorCode::solver_failure, traj.failure_message);
        py::dict out;
        out["n_steps"] = traj.n_steps();
        out["final"] = interpolants(traj, params.t_final).second;
        out["mass_curve"] = mass_curve(traj);
        const DistanceBudget budget = total_square_distance_report(traj, spec);
        out["sum_mk_sq"] = budget.sum_mk_sq;
        out["sum_fr_sq"] = budget.sum_fr_sq;
        out["distance_bound"] = budget.bound;
        out["distance_bound_satisfied"] = budget.satisfied;
        std::vector<py::dict> reports;
        for (const TrajectoryStep& s : traj.steps) {
          reports.push_back(report_to_dict(s.mk_report));
          reports.push_back(report_to_dict(s.fr_report));
        }
        out["reports"] = reports;
        return out;
      },
      py::arg("rho0"), py::arg("spec"), py::arg("tau"), py::arg("t_final"),
      py::arg("mk_enabled") = true, py::arg("fr_enabled") = true);

  mod.def(
      "fd_reference",
      [](const DiscreteMeasure& rho0, const EnergySpec& spec, double t_final,
         double dt) {
        OracleParams params;
        params.dt = dt;
        const OracleResult res = fd_reference(rho0, spec, t_final, params);
        return res.snapshots.back().state;
      },
      py::arg("rho0"), py::arg("spec"), py::arg("t_final"), py::arg("dt"));
  mod.def("oracle_stable_dt", &oracle_stable_dt);
}
