#include "kfr/mk_step.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <optional>

#include "kfr/metrics.hpp"

namespace kfr {

namespace {

// Lagrangian objective
//   G(X) = (1/2tau) sum dm (X_k - X0_k)^2 + sum_k W_k U(dm/W_k)
//        + dm sum Psi(X_k) + (1/2) dm^2 sum_{k,j} K(X_k - X_j),
// where W_k is the width of particle k's interval: midpoints between
// neighbours inside, anchored at the domain walls for the two end
// particles. Wall anchoring keeps W smooth in X (no clamp kinks that trap
// boundary particles), makes a uniform state in wall contact exactly
// stationary, and prices compression against a wall the way the Eulerian
// functional does; far from the walls the end intervals only carry an
// O(dm^m / W^{m-1}) vacuum smear. The width map s -> s U(dm/s) is convex
// and decreasing for (H)-type U (derivative -P(dm/s)), so the internal
// term is convex in X.
struct LagrangianProblem {
  double tau;
  double dm;
  double left, right;
  double min_gap;
  const InternalEnergy* internal;
  bool has_internal;
  std::optional<SampledPotential> psi;
  std::optional<SampledKernel> kernel;
  std::vector<double> x0;

  int size() const { return static_cast<int>(x0.size()); }

  double width_energy(double s) const { return s * internal->value(dm / s); }

  // Interval boundaries: walls, then midpoints between neighbours.
  void boundaries(const std::vector<double>& x, std::vector<double>& b) const {
    const int n = size();
    b.resize(n + 1);
    b[0] = left;
    for (int k = 1; k < n; ++k) b[k] = 0.5 * (x[k - 1] + x[k]);
    b[n] = right;
  }

  double objective(const std::vector<double>& x) const {
    const int n = size();
    double g = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = x[k] - x0[k];
      g += 0.5 / tau * dm * d * d;
      if (psi) g += dm * psi->value(x[k]);
    }
    if (has_internal) {
      std::vector<double> b;
      boundaries(x, b);
      for (int k = 0; k < n; ++k) g += width_energy(b[k + 1] - b[k]);
    }
    if (kernel) {
      double w = 0.0;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) w += kernel->value(x[k] - x[j]);
      g += 0.5 * dm * dm * w;
    }
    return g;
  }

  // dW_k/dX_j is nonzero only for j in {k-1, k, k+1}; stored per width.
  struct WidthDeriv {
    double d_prev = 0.0, d_self = 0.0, d_next = 0.0;
  };

  void width_derivs(const std::vector<double>& x,
                    std::vector<WidthDeriv>& deriv,
                    std::vector<double>& width) const {
    const int n = size();
    std::vector<double> b;
    boundaries(x, b);
    deriv.assign(n, {});
    width.resize(n);
    for (int k = 0; k < n; ++k) width[k] = b[k + 1] - b[k];
    for (int k = 0; k < n; ++k) {
      if (k + 1 < n) {  // db_{k+1}/dX, midpoint (X_k + X_{k+1})/2
        deriv[k].d_self += 0.5;
        deriv[k].d_next += 0.5;
      }
      if (k > 0) {  // -db_k/dX, midpoint (X_{k-1} + X_k)/2
        deriv[k].d_prev -= 0.5;
        deriv[k].d_self -= 0.5;
      }
    }
  }

  std::vector<double> gradient(const std::vector<double>& x) const {
    const int n = size();
    std::vector<double> g(n);
    for (int k = 0; k < n; ++k) {
      g[k] = dm / tau * (x[k] - x0[k]);
      if (psi) g[k] += dm * psi->slope(x[k]);
    }
    if (has_internal) {
      std::vector<WidthDeriv> deriv;
      std::vector<double> width;
      width_derivs(x, deriv, width);
      for (int k = 0; k < n; ++k) {
        const double fp = -pressure(*internal, dm / width[k]);
        if (k > 0) g[k - 1] += fp * deriv[k].d_prev;
        g[k] += fp * deriv[k].d_self;
        if (k + 1 < n) g[k + 1] += fp * deriv[k].d_next;
      }
    }
    if (kernel) {
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += kernel->slope(x[k] - x[j]);
        g[k] += dm * dm * s;
      }
    }
    return g;
  }

  // Banded Hessian (bandwidth 2): prox + potential curvature on the
  // diagonal, internal width terms as rank-one stencils. The interaction
  // kernel contributes only its diagonal; the dense off-diagonal block is
  // dominated by the proximal term (scale dm^2 N K'' ~ m tau/sigma^2 times
  // smaller) and the line search covers the difference.
  void hessian_band(const std::vector<double>& x,
                    std::vector<std::array<double, 3>>& band) const {
    const int n = size();
    band.assign(n, {0.0, 0.0, 0.0});  // [0]=diag, [1]=offdiag+1, [2]=offdiag+2
    for (int k = 0; k < n; ++k) {
      band[k][0] = dm / tau;
      if (psi) band[k][0] += dm * psi->curvature(x[k]);
    }
    if (has_internal) {
      std::vector<WidthDeriv> deriv;
      std::vector<double> width;
      width_derivs(x, deriv, width);
      for (int k = 0; k < n; ++k) {
        const double w = width[k];
        const double rho = dm / w;
        const double c = dm * dm / (w * w * w) * internal->second_deriv(rho);
        const double d[3] = {deriv[k].d_prev, deriv[k].d_self, deriv[k].d_next};
        const int idx[3] = {k - 1, k, k + 1};
        for (int a = 0; a < 3; ++a) {
          if (idx[a] < 0 || idx[a] >= n || d[a] == 0.0) continue;
          for (int bi = a; bi < 3; ++bi) {
            if (idx[bi] < 0 || idx[bi] >= n || d[bi] == 0.0) continue;
            const int lo = idx[a], hi = idx[bi];
            band[lo][hi - lo] += c * d[a] * d[bi];
          }
        }
      }
    }
    if (kernel) {
      for (int k = 0; k < n; ++k) {
        double curv = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != k) curv += kernel->curvature(x[k] - x[j]);
        band[k][0] += dm * dm * curv;
      }
    }
  }
};

// Projection onto {x : x_{k+1} - x_k >= gap} by isotonic regression (pool
// adjacent violators on the shifted variables), then clamped into the domain
// with gap-preserving sweeps.
void project_monotone(std::vector<double>& x, double gap, double left,
                      double right) {
  const int n = static_cast<int>(x.size());
  std::vector<double> z(n);
  for (int k = 0; k < n; ++k) z[k] = x[k] - k * gap;

  std::vector<double> mean(n);
  std::vector<int> count(n);
  int blocks = 0;
  for (int k = 0; k < n; ++k) {
    mean[blocks] = z[k];
    count[blocks] = 1;
    ++blocks;
    while (blocks > 1 && mean[blocks - 2] >= mean[blocks - 1]) {
      const int c = count[blocks - 2] + count[blocks - 1];
      mean[blocks - 2] =
          (mean[blocks - 2] * count[blocks - 2] + mean[blocks - 1] * count[blocks - 1]) / c;
      count[blocks - 2] = c;
      --blocks;
    }
  }
  int k = 0;
  for (int b = 0; b < blocks; ++b)
    for (int c = 0; c < count[b]; ++c, ++k) x[k] = mean[b] + k * gap;

  x[0] = std::max(x[0], left);
  for (int i = 1; i < n; ++i) x[i] = std::max(x[i], x[i - 1] + gap);
  x[n - 1] = std::min(x[n - 1], right);
  for (int i = n - 2; i >= 0; --i) x[i] = std::min(x[i], x[i + 1] - gap);
}

// LDLt factorization and solve for an SPD band matrix of bandwidth 2;
// band[i] = { A(i,i), A(i,i+1), A(i,i+2) }.
bool band_ldlt_solve(const std::vector<std::array<double, 3>>& band,
                     const std::vector<double>& rhs, std::vector<double>& out) {
  const int n = static_cast<int>(band.size());
  std::vector<double> d(n), l1(std::max(0, n - 1), 0.0),
      l2(std::max(0, n - 2), 0.0);
  for (int j = 0; j < n; ++j) {
    double dj = band[j][0];
    if (j >= 1) dj -= l1[j - 1] * l1[j - 1] * d[j - 1];
    if (j >= 2) dj -= l2[j - 2] * l2[j - 2] * d[j - 2];
    if (!(dj > 0.0) || !std::isfinite(dj)) return false;
    d[j] = dj;
    if (j + 1 < n) {
      double a = band[j][1];
      if (j >= 1) a -= l2[j - 1] * d[j - 1] * l1[j - 1];
      l1[j] = a / dj;
    }
    if (j + 2 < n) l2[j] = band[j][2] / dj;
  }
  out = rhs;
  for (int i = 0; i < n; ++i) {
    if (i >= 1) out[i] -= l1[i - 1] * out[i - 1];
    if (i >= 2) out[i] -= l2[i - 2] * out[i - 2];
  }
  for (int i = 0; i < n; ++i) out[i] /= d[i];
  for (int i = n - 1; i >= 0; --i) {
    if (i + 1 < n) out[i] -= l1[i] * out[i + 1];
    if (i + 2 < n) out[i] -= l2[i] * out[i + 2];
  }
  return std::all_of(out.begin(), out.end(),
                     [](double v) { return std::isfinite(v); });
}

bool newton_direction(const LagrangianProblem& prob,
                      const std::vector<double>& x,
                      const std::vector<double>& grad,
                      std::vector<double>& dir) {
  const int n = prob.size();
  std::vector<std::array<double, 3>> band;
  prob.hessian_band(x, band);
  std::vector<double> rhs(n);
  for (int k = 0; k < n; ++k) rhs[k] = -grad[k];
  if (band_ldlt_solve(band, rhs, dir)) return true;
  // Non-convex kernel or potential curvature: retry with a ridge.
  double trace = 0.0;
  for (int k = 0; k < n; ++k) trace += band[k][0];
  for (int attempt = 0; attempt < 3; ++attempt) {
    const double ridge = 1e-8 * trace / n * std::pow(100.0, attempt);
    std::vector<std::array<double, 3>> shifted = band;
    for (int k = 0; k < n; ++k) shifted[k][0] += ridge;
    if (band_ldlt_solve(shifted, rhs, dir)) return true;
  }
  return false;
}

}  // namespace

std::vector<double> grid_gradient(const std::vector<double>& values, double h) {
  const int n = static_cast<int>(values.size());
  std::vector<double> g(n, 0.0);
  if (n < 2) return g;
  if (n == 2) {
    g[0] = g[1] = (values[1] - values[0]) / h;
    return g;
  }
  for (int i = 1; i + 1 < n; ++i) g[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
  g[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
  g[n - 1] =
      (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
  return g;
}

std::pair<DiscreteMeasure, StepReport> mk_jko_step(const DiscreteMeasure& mu,
                                                   const EnergySpec& spec,
                                                   double tau,
                                                   const MkSolverOptions& opts) {
  require(tau > 0.0, ErrorCode::bad_parameter, "tau must be positive");
  check_spec_compatible(spec, mu.grid, "mk_jko_step");
  const double mass = total_mass(mu);
  require(mass > 0.0, ErrorCode::zero_mass,
          "mk_jko_step needs a measure with positive mass");

  StepReport report;
  report.kind = SubstepKind::mk;
  report.energy_before = energy(mu, spec);

  const int np = opts.resolved_particles(mu.grid.n_cells);
  const LagrangianRep start = to_lagrangian(mu, np);

  LagrangianProblem prob;
  prob.tau = tau;
  prob.dm = start.mass_quantum;
  prob.left = mu.grid.left;
  prob.right = mu.grid.right;
  prob.min_gap = opts.monotonicity_eps * mu.grid.h();
  prob.internal = &spec.internal;
  prob.has_internal = spec.internal.kind() != InternalEnergy::Kind::zero;
  if (spec.has_psi()) prob.psi.emplace(mu.grid, spec.psi);
  if (spec.has_kernel()) prob.kernel.emplace(mu.grid.h(), spec.kernel);
  prob.x0 = start.positions;

  if (prob.has_internal) {
    bool convex = true;
    for (double r : {1e-6, 1e-3, 0.1, 1.0, std::max(1.0, linf(mu))})
      if (spec.internal.second_deriv(r) < -1e-12) convex = false;
    if (!convex)
      report.warnings.push_back("internal energy not convex; minimizer may be "
                                "a stationary point only");
  }
  if (prob.kernel) {
    bool convex = true;
    for (int d = 0; d + 2 < mu.grid.n_cells; d += std::max(1, mu.grid.n_cells / 16))
      if (prob.kernel->curvature((d + 0.5) * mu.grid.h()) < -1e-12) convex = false;
    if (!convex)
      report.warnings.push_back(
          "interaction kernel not convex; seeking a stationary point");
  }

  std::vector<double> x = prob.x0;
  project_monotone(x, prob.min_gap, prob.left, prob.right);
  double g_cur = prob.objective(x);
  const double lag_energy_start = g_cur;  // proximal term vanishes at x0

  const auto stationarity_norm = [&](const std::vector<double>& xx,
                                     const std::vector<double>& grad) {
    // Norm of the projected EL field (X - Pi(X - (tau/dm) grad)) / tau,
    // mass-weighted; coincides with sqrt(sum grad^2/dm) away from the cone
    // boundary.
    std::vector<double> trial(xx.size());
    for (size_t k = 0; k < xx.size(); ++k)
      trial[k] = xx[k] - tau / prob.dm * grad[k];
    project_monotone(trial, prob.min_gap, prob.left, prob.right);
    double s = 0.0;
    for (size_t k = 0; k < xx.size(); ++k) {
      const double r = (xx[k] - trial[k]) / tau;
      s += prob.dm * r * r;
    }
    return std::sqrt(s);
  };

  const bool trace = std::getenv("KFR_MK_TRACE") != nullptr;
  int iters = 0;
  bool converged = false;
  for (; iters < opts.max_iters; ++iters) {
    const std::vector<double> grad = prob.gradient(x);
    const double sn = stationarity_norm(x, grad);
    if (trace)
      std::fprintf(stderr, "mk iter %d stat %.3e G %.12e\n", iters, sn, g_cur);
    if (sn <= opts.grad_tol) {
      converged = true;
      break;
    }

    std::vector<double> dir;
    bool have_newton = newton_direction(prob, x, grad, dir);
    if (!have_newton) {
      dir.resize(grad.size());
      for (size_t k = 0; k < grad.size(); ++k)
        dir[k] = -tau / prob.dm * grad[k];
    }

    bool accepted = false;
    for (int pass = 0; pass < 2 && !accepted; ++pass) {
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        std::vector<double> cand(x.size());
        for (size_t k = 0; k < x.size(); ++k) cand[k] = x[k] + alpha * dir[k];
        project_monotone(cand, prob.min_gap, prob.left, prob.right);
        double inner = 0.0;
        for (size_t k = 0; k < x.size(); ++k)
          inner += grad[k] * (cand[k] - x[k]);
        const double g_new = prob.objective(cand);
        if (g_new <= g_cur + 1e-4 * std::min(0.0, inner) &&
            g_new <= g_cur) {
          x = std::move(cand);
          g_cur = g_new;
          accepted = true;
          break;
        }
      }
      if (!accepted && have_newton) {
        // Newton direction unusable after projection; retry with the
        // preconditioned gradient.
        have_newton = false;
        for (size_t k = 0; k < grad.size(); ++k)
          dir[k] = -tau / prob.dm * grad[k];
      } else {
        break;
      }
    }
    if (!accepted) break;  // stalled at floating-point resolution
  }

  if (!converged) {
    const std::vector<double> grad = prob.gradient(x);
    if (stationarity_norm(x, grad) > opts.grad_tol)
      report.warnings.push_back(
          "non_convergence: stationarity above grad_tol after max_iters; "
          "returning best iterate");
    else
      converged = true;
  }

  if (g_cur > lag_energy_start + 1e-10 * (1.0 + std::abs(lag_energy_start)))
    report.warnings.push_back("Lagrangian objective increased (roundoff?)");

  double dist_sq = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - prob.x0[k];
    dist_sq += prob.dm * d * d;
  }

  LagrangianRep rep;
  rep.mass_quantum = prob.dm;
  rep.positions = x;
  DiscreteMeasure out = from_lagrangian(rep, mu.grid);

  report.dist_sq_moved = dist_sq;
  report.energy_after = energy(out, spec);
  report.iterations = iters;
  report.el_residual = mk_el_residual(mu, out, tau, spec, opts);
  return {std::move(out), std::move(report)};
}

double mk_el_residual(const DiscreteMeasure& mu, const DiscreteMeasure& rho_star,
                      double tau, const EnergySpec& spec,
                      const MkSolverOptions& opts) {
  const double ma = total_mass(mu), mb = total_mass(rho_star);
  require(ma > 0.0 && mb > 0.0, ErrorCode::zero_mass,
          "mk_el_residual needs positive masses");
  require(std::abs(ma - mb) <= 1e-10 * std::max(ma, mb),
          ErrorCode::mass_mismatch, "mk_el_residual requires equal masses");

  const int np = opts.resolved_particles(rho_star.grid.n_cells);
  const LagrangianRep qs = to_lagrangian(rho_star, np);
  const LagrangianRep q0 = to_lagrangian(mu, np);

  std::vector<double> fv = first_variation(rho_star, spec);
  for (double& v : fv)
    if (!std::isfinite(v)) v = 0.0;  // vacuum cells of singular U'
  const std::vector<double> w = grid_gradient(fv, rho_star.grid.h());

  const Grid& g = rho_star.grid;
  const auto interp = [&](double x) {
    const double t = (x - g.cell_center(0)) / g.h();
    if (t <= 0.0) return w.front();
    if (t >= g.n_cells - 1) return w.back();
    const int i = static_cast<int>(t);
    const double f = t - i;
    return (1.0 - f) * w[i] + f * w[i + 1];
  };

  double s = 0.0;
  for (int k = 0; k < np; ++k) {
    const double r = (qs.positions[k] - q0.positions[k]) / tau +
                     interp(qs.positions[k]);
    s += qs.mass_quantum * r * r;
  }
  return std::sqrt(s);
}

TaylorCheck taylor_remainder_check(const DiscreteMeasure& mu,
                                   const DiscreteMeasure& rho_star, double tau,
                                   const EnergySpec& spec,
                                   const std::vector<double>& phi) {
  check_same_grid(mu, rho_star, "taylor_remainder_check");
  require(phi.size() == mu.density.size(), ErrorCode::grid_mismatch,
          "test function must be sampled on the grid");
  const double h = mu.grid.h();

  TaylorCheck out;
  for (size_t i = 0; i < phi.size(); ++i)
    out.lhs += h * (rho_star.density[i] - mu.density[i]) * phi[i];

  std::vector<double> fv = first_variation(rho_star, spec);
  for (double& v : fv)
    if (!std::isfinite(v)) v = 0.0;
  const std::vector<double> w = grid_gradient(fv, h);
  const std::vector<double> dphi = grid_gradient(phi, h);
  for (size_t i = 0; i < phi.size(); ++i)
    out.rhs += -tau * h * rho_star.density[i] * w[i] * dphi[i];

  out.remainder = out.lhs - out.rhs;
  return out;
}

}  // namespace kfr
