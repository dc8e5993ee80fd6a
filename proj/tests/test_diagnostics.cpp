#include <doctest.h>

#include <cmath>

#include "kfr/diagnostics.hpp"
#include "kfr/metrics.hpp"

using namespace kfr;

namespace {

EnergySpec quadratic_spec() {
  EnergySpec spec;
  spec.internal = InternalEnergy::quadratic();
  return spec;
}

DiscreteMeasure gaussian_bump(const Grid& g, double center, double width,
                              double height) {
  return measure_from_fn(g, [&](double x) {
           const double z = (x - center) / width;
           return height * std::exp(-z * z);
         })
      .measure;
}

}  // namespace

TEST_CASE("oracle: zero data, stability guard, conservation") {
  Grid g(-1.0, 1.0, 50);
  EnergySpec spec = quadratic_spec();

  DiscreteMeasure zero(g, std::vector<double>(g.n_cells, 0.0));
  OracleParams p;
  p.dt = 1e-4;
  auto res = fd_reference(zero, spec, 0.01, p);
  for (double v : res.snapshots.back().state.density) CHECK(v == 0.0);

  DiscreteMeasure bump = gaussian_bump(g, 0.0, 0.3, 1.0);
  OracleParams bad;
  bad.dt = 10.0 * oracle_stable_dt(bump, spec);
  CHECK_THROWS_AS(fd_reference(bump, spec, 0.01, bad), Error);

  // Diffusion only: mass conserved to 1e-10 by the telescoping fluxes.
  OracleParams diff;
  diff.dt = 0.5 * oracle_stable_dt(bump, spec);
  diff.reaction_enabled = false;
  auto dres = fd_reference(bump, spec, 0.05, diff);
  CHECK(std::abs(total_mass(dres.snapshots.back().state) - total_mass(bump)) <=
        1e-10);
  CHECK(dres.clip_events == 0);
}

TEST_CASE("oracle: reaction-only matches the exact ODE at O(dt)") {
  Grid g(0.0, 1.0, 10);
  DiscreteMeasure one(g, std::vector<double>(10, 1.0));
  EnergySpec spec = quadratic_spec();

  OracleParams p;
  p.dt = 1e-4;
  p.flux_enabled = false;
  auto res = fd_reference(one, spec, 0.5, p);
  const double exact = 1.0 / (1.0 + 2.0 * 0.5);
  for (double v : res.snapshots.back().state.density)
    CHECK(v == doctest::Approx(exact).epsilon(5e-4));
}

TEST_CASE("oracle positivity on strictly positive data") {
  Grid g(-1.0, 1.0, 64);
  DiscreteMeasure rho0 =
      measure_from_fn(g, [](double x) { return 0.2 + std::exp(-4 * x * x); })
          .measure;
  EnergySpec spec = quadratic_spec();
  OracleParams p;
  p.dt = 0.5 * oracle_stable_dt(rho0, spec);
  auto res = fd_reference(rho0, spec, 0.05, p);
  CHECK(res.clip_events == 0);
}

TEST_CASE("compare: pseudometric basics and restriction") {
  Grid fine(-1.0, 1.0, 64);
  Grid coarse(-1.0, 1.0, 32);
  DiscreteMeasure a = gaussian_bump(fine, 0.0, 0.3, 1.0);
  DiscreteMeasure b = gaussian_bump(coarse, 0.0, 0.3, 1.0);

  std::vector<OracleSnapshot> sa = {{0.0, a}};
  std::vector<OracleSnapshot> sb = {{0.0, b}};
  auto rows_same = compare(sa, sa, {0.0}, Norm::l1);
  CHECK(rows_same[0].error == 0.0);

  auto ab = compare(sa, sb, {0.0}, Norm::l1);
  auto ba = compare(sb, sa, {0.0}, Norm::l1);
  CHECK(ab[0].error == doctest::Approx(ba[0].error));

  // Triangle inequality for l1 on a common grid.
  DiscreteMeasure c = gaussian_bump(fine, 0.2, 0.25, 0.8);
  std::vector<OracleSnapshot> sc = {{0.0, c}};
  DiscreteMeasure d = gaussian_bump(fine, -0.1, 0.4, 1.1);
  std::vector<OracleSnapshot> sd = {{0.0, d}};
  const double ac = compare(sa, sc, {0.0}, Norm::l1)[0].error;
  const double cd = compare(sc, sd, {0.0}, Norm::l1)[0].error;
  const double ad = compare(sa, sd, {0.0}, Norm::l1)[0].error;
  CHECK(ad <= ac + cd + 1e-12);

  Grid incompatible(-1.0, 1.0, 48);
  std::vector<OracleSnapshot> se = {{0.0, gaussian_bump(incompatible, 0, 1, 1)}};
  CHECK_THROWS_AS(compare(sa, se, {0.0}, Norm::l1), Error);
}

TEST_CASE("EDI report on a dissipating PME flow") {
  Grid g(-1.0, 1.0, 100);
  DiscreteMeasure rho0 = gaussian_bump(g, 0.0, 0.3, 1.0);
  EnergySpec spec = quadratic_spec();

  SchemeParams params;
  params.tau = 1e-3;
  params.t_final = 0.05;
  params.mk_opts.grad_tol = 1e-7;
  Trajectory traj = run_splitting(rho0, spec, params);
  REQUIRE(!traj.failed);

  const std::vector<double> cps = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
  EdiReport rep = edi_report(traj, spec, cps);
  CHECK(rep.hypotheses_certified);
  REQUIRE(rep.entries.size() == 5);
  const double f0 = energy(rho0, spec);
  for (const EdiEntry& e : rep.entries) {
    CHECK(e.slack >= -1e-6 * f0);
    CHECK(e.f_t2 <= e.f_t1 + 1e-12);
    CHECK(e.dissipation_integral >= 0.0);
  }
}

TEST_CASE("EDI on the zero measure is all zeros") {
  Grid g(0.0, 1.0, 16);
  DiscreteMeasure zero(g, std::vector<double>(16, 0.0));
  SchemeParams params;
  params.tau = 1e-2;
  params.t_final = 0.04;
  Trajectory traj = run_splitting(zero, quadratic_spec(), params);
  EdiReport rep = edi_report(traj, quadratic_spec(), {0.0, 0.02, 0.04});
  for (const EdiEntry& e : rep.entries) {
    CHECK(e.slack == 0.0);
    CHECK(e.dissipation_integral == 0.0);
  }
}

TEST_CASE("EDI reaction-only dissipation matches the exact time integral") {
  // rho(t) = 1/(1+2t): int |U'(rho)|^2 rho dt = int 4 rho^3 from t1 to t2
  // = [ -(1+2t)^{-2} ]_{t1}^{t2} ... computed exactly below.
  Grid g(0.0, 1.0, 8);
  DiscreteMeasure one(g, std::vector<double>(8, 1.0));
  EnergySpec spec = quadratic_spec();
  SchemeParams params;
  params.tau = 1e-3;
  params.t_final = 0.2;
  params.mk_enabled = false;
  Trajectory traj = run_splitting(one, spec, params);

  EdiReport rep = edi_report(traj, spec, {0.0, 0.2});
  // int_0^T 4 rho(t)^3 dt with rho(t) = 1/(1+2t):
  // = 4 * [-(1/4)(1+2t)^{-2}]_0^T = 1 - (1+2T)^{-2}.
  const double exact = 1.0 - std::pow(1.0 + 2.0 * 0.2, -2.0);
  CHECK(rep.entries[0].dissipation_integral ==
        doctest::Approx(exact).epsilon(5e-3));
}

TEST_CASE("convergence study shapes and orders") {
  StudyConfig cfg;
  cfg.left = -1.0;
  cfg.right = 1.0;
  cfg.initial = [](const Grid& g) {
    return measure_from_fn(g, [](double x) {
             return 0.3 + std::exp(-6 * x * x);
           })
        .measure;
  };
  cfg.make_spec = [](const Grid&) {
    EnergySpec spec;
    spec.internal = InternalEnergy::quadratic();
    return spec;
  };
  cfg.t_final = 0.02;
  cfg.scheme.mk_opts.grad_tol = 1e-7;

  // Single-entry lists: one row, no order estimate.
  auto single = convergence_study(cfg, {2e-3}, {64});
  REQUIRE(single.size() == 1);
  CHECK(single[0].observed_order == 0.0);
  CHECK(single[0].error > 0.0);

  // tau halving at fixed h: errors decrease.
  auto rows = convergence_study(cfg, {4e-3, 2e-3, 1e-3}, {64});
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].error < rows[0].error);
  CHECK(rows[2].error < rows[1].error);

  // Zero data: zero errors everywhere.
  StudyConfig zero_cfg = cfg;
  zero_cfg.initial = [](const Grid& g) {
    return DiscreteMeasure(g, std::vector<double>(g.n_cells, 0.0));
  };
  auto zero_rows = convergence_study(zero_cfg, {2e-3, 1e-3}, {64, 32});
  for (const auto& r : zero_rows) CHECK(r.error == 0.0);
}
