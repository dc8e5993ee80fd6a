#include "kfr/fr_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kfr/metrics.hpp"

namespace kfr {

namespace {

double stationarity(double s, double mu_sqrt, double c, double tau,
                    const InternalEnergy& U) {
  return s * (1.0 + 0.5 * tau * (U.deriv(s * s) + c)) - mu_sqrt;
}

double stationarity_deriv(double s, double c, double tau,
                          const InternalEnergy& U) {
  const double rho = s * s;
  return 1.0 + 0.5 * tau * (U.deriv(rho) + c) + tau * rho * U.second_deriv(rho);
}

double objective(double s, double mu_sqrt, double c, double tau,
                 const InternalEnergy& U) {
  const double d = s - mu_sqrt;
  return (2.0 / tau) * d * d + U.value(s * s) + c * s * s;
}

}  // namespace

double fr_pointwise_solve(double mu_i, double c_i, double tau,
                          const InternalEnergy& internal,
                          const FrSolverOptions& opts) {
  require(tau > 0.0, ErrorCode::bad_parameter, "tau must be positive");
  require(mu_i >= 0.0, ErrorCode::bad_parameter, "mu_i must be nonnegative");
  if (mu_i == 0.0) return 0.0;

  const double mu_sqrt = std::sqrt(mu_i);
  double lo = 0.0;
  double hi = mu_sqrt * (1.0 + tau * std::max(0.0, -c_i));
  double f_hi = stationarity(hi, mu_sqrt, c_i, tau, internal);
  for (int grow = 0; f_hi < 0.0 && grow < 64; ++grow) {
    hi *= 2.0;
    f_hi = stationarity(hi, mu_sqrt, c_i, tau, internal);
  }
  require(f_hi >= 0.0, ErrorCode::bracket_failure,
          "could not bracket the Fisher-Rao stationarity root");

  double s = std::min(mu_sqrt, hi);
  bool converged = false;
  for (int it = 0; it < opts.max_newton_iters; ++it) {
    const double f = stationarity(s, mu_sqrt, c_i, tau, internal);
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    if (std::abs(f) <= opts.newton_tol) {
      converged = true;
      // One polishing step; quadratic convergence pushes the residual to
      // the floating-point floor so downstream residual checks see the
      // discretization, not the root solve.
      const double dfd = stationarity_deriv(s, c_i, tau, internal);
      if (std::isfinite(dfd) && dfd > 0.0) {
        const double sn = s - f / dfd;
        if (sn > lo && sn < hi) s = sn;
      }
      break;
    }
    const double dfd = stationarity_deriv(s, c_i, tau, internal);
    double sn = (std::isfinite(dfd) && dfd > 0.0) ? s - f / dfd
                                                  : 0.5 * (lo + hi);
    if (!(sn > lo && sn < hi)) sn = 0.5 * (lo + hi);
    if (sn == s) {
      converged = true;
      break;
    }
    s = sn;
  }
  if (!converged &&
      std::abs(stationarity(s, mu_sqrt, c_i, tau, internal)) > opts.newton_tol) {
    // Plain bisection as the safeguard of last resort.
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (stationarity(mid, mu_sqrt, c_i, tau, internal) > 0.0)
        hi = mid;
      else
        lo = mid;
    }
    s = 0.5 * (lo + hi);
    require(std::abs(stationarity(s, mu_sqrt, c_i, tau, internal)) <=
                std::max(opts.newton_tol, 1e-12 * (1.0 + mu_sqrt)),
            ErrorCode::newton_failure,
            "Fisher-Rao pointwise solve did not converge");
  }

  // Pointwise domination is structural under U' >= 0 and c >= 0.
  if (c_i >= 0.0) s = std::min(s, mu_sqrt);
  if (s < 0.0) s = 0.0;
  return s * s;
}

std::pair<DiscreteMeasure, StepReport> fr_jko_step(const DiscreteMeasure& mu,
                                                   const EnergySpec& spec,
                                                   double tau,
                                                   const FrSolverOptions& opts) {
  require(tau > 0.0, ErrorCode::bad_parameter, "tau must be positive");
  check_spec_compatible(spec, mu.grid, "fr_jko_step");

  StepReport report;
  report.kind = SubstepKind::fr;
  report.energy_before = energy(mu, spec);

  const int n = mu.grid.n_cells;
  const double sup = linf(mu);

  if (!spec.internal.catalog_h()) {
    const HypothesisReport hyp = check_hypotheses(
        spec, std::max(sup, 1e-6), 1);
    if (!hyp.satisfies_h) {
      require(opts.allow_non_h, ErrorCode::bad_parameter,
              "internal energy fails hypothesis (H); pass allow_non_h to "
              "override");
      report.warnings.push_back("non-(H) internal energy accepted by override");
    }
  }

  // CFL tau < 2/U'(linf) on the current iterate.
  const double du_sup = spec.internal.deriv(sup);
  if (std::isfinite(du_sup) && du_sup > 0.0 && tau * du_sup >= 2.0) {
    require(opts.cfl_override, ErrorCode::cfl_violation,
            "tau >= 2/U'(linf(mu)); reduce the time step or override");
    report.warnings.push_back("CFL condition overridden");
  }

  std::vector<double> c(n, 0.0);
  {
    const std::vector<double> conv = kernel_convolution(mu, spec);
    for (int i = 0; i < n; ++i)
      c[i] = (spec.has_psi() ? spec.psi[i] : 0.0) + conv[i];
  }
  const double c_min = c.empty() ? 0.0 : *std::min_element(c.begin(), c.end());
  require(2.0 / tau + std::min(0.0, c_min) > 0.0, ErrorCode::cfl_violation,
          "attractive potential too strong: 2/tau + min(c) <= 0 breaks "
          "convexity of the cell objective");

  std::vector<double> out(n, 0.0);
  const int outer_rounds =
      (spec.has_kernel() &&
       opts.interaction_mode == FrSolverOptions::InteractionMode::fixed_point)
          ? opts.max_outer
          : 1;

  int outer_used = 0;
  for (int round = 0; round < outer_rounds; ++round) {
    ++outer_used;
    for (int i = 0; i < n; ++i)
      out[i] = fr_pointwise_solve(mu.density[i], c[i], tau, spec.internal, opts);
    if (outer_rounds == 1) break;

    const DiscreteMeasure cur(mu.grid, out);
    const std::vector<double> conv = kernel_convolution(cur, spec);
    double delta = 0.0;
    std::vector<double> c_next(n);
    for (int i = 0; i < n; ++i) {
      c_next[i] = (spec.has_psi() ? spec.psi[i] : 0.0) + conv[i];
      delta = std::max(delta, std::abs(c_next[i] - c[i]));
    }
    c = std::move(c_next);
    if (delta <= opts.outer_tol) break;
    if (round + 1 == outer_rounds)
      report.warnings.push_back("interaction fixed point hit max_outer");
  }

  // The per-cell minimizer never raises the cell objective above s = sqrt(mu).
  for (int i = 0; i < n; ++i) {
    const double s = std::sqrt(out[i]);
    const double gs = objective(s, std::sqrt(mu.density[i]), c[i], tau,
                                spec.internal);
    const double gmu = objective(std::sqrt(mu.density[i]),
                                 std::sqrt(mu.density[i]), c[i], tau,
                                 spec.internal);
    if (gs > gmu + 1e-12 * (1.0 + std::abs(gmu))) {
      report.warnings.push_back("cell objective increased (roundoff?)");
      break;
    }
  }

  DiscreteMeasure result(mu.grid, std::move(out));
  report.dist_sq_moved = fr_distance_sq(result, mu);
  report.energy_after = energy(result, spec);
  report.el_residual = fr_el_residual(mu, result, tau, spec);
  report.iterations = outer_used;
  return {std::move(result), std::move(report)};
}

double fr_el_residual(const DiscreteMeasure& mu, const DiscreteMeasure& rho_star,
                      double tau, const EnergySpec& spec) {
  check_same_grid(mu, rho_star, "fr_el_residual");
  const std::vector<double> fv = first_variation(rho_star, spec);
  double s2 = 0.0;
  for (int i = 0; i < mu.grid.n_cells; ++i) {
    const double sr = std::sqrt(rho_star.density[i]);
    const double sm = std::sqrt(mu.density[i]);
    const double fvi = rho_star.density[i] > 0.0 ? fv[i] : 0.0;
    const double r = (rho_star.density[i] - mu.density[i]) +
                     tau * (sr * (sr + sm) / 2.0) * fvi;
    s2 += r * r;
  }
  return std::sqrt(s2);
}

}  // namespace kfr
