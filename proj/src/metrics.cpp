#include "kfr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kfr {

double mk_distance_sq(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      int n_particles) {
  const double ma = total_mass(a), mb = total_mass(b);
  require(ma > 0.0 && mb > 0.0, ErrorCode::zero_mass,
          "mk_distance_sq needs positive masses");
  require(std::abs(ma - mb) <= 1e-10 * std::max(ma, mb),
          ErrorCode::mass_mismatch,
          "mk_distance_sq requires equal masses");
  const LagrangianRep qa = to_lagrangian(a, n_particles);
  const LagrangianRep qb = to_lagrangian(b, n_particles);
  const double dm = 0.5 * (qa.mass_quantum + qb.mass_quantum);
  double s = 0.0;
  for (int k = 0; k < n_particles; ++k) {
    const double d = qa.positions[k] - qb.positions[k];
    s += d * d;
  }
  return dm * s;
}

double fr_distance_sq(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  check_same_grid(a, b, "fr_distance_sq");
  double s = 0.0;
  for (size_t i = 0; i < a.density.size(); ++i) {
    const double d = std::sqrt(a.density[i]) - std::sqrt(b.density[i]);
    s += d * d;
  }
  return 4.0 * a.grid.h() * s;
}

double kfr_dirac_sq(const DiracMass& p, const DiracMass& q) {
  require(p.weight >= 0.0 && q.weight >= 0.0, ErrorCode::bad_parameter,
          "Dirac weights must be nonnegative");
  const double angle =
      std::min(std::abs(q.position - p.position), std::numbers::pi);
  return 4.0 * (p.weight + q.weight -
                2.0 * std::sqrt(p.weight * q.weight) * std::cos(0.5 * angle));
}

double kfr_upper_bound_sq(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          int n_particles) {
  const double ma = total_mass(a), mb = total_mass(b);
  if (ma == 0.0 && mb == 0.0) return 0.0;
  require(mb > 0.0, ErrorCode::zero_mass,
          "kfr_upper_bound_sq needs |b| > 0 when |a| > 0");
  const DiscreteMeasure bt = rescale(b, ma / mb);
  // MK leg vanishes when a carries no mass (both endpoints are zero).
  const double mk_leg = ma > 0.0 ? mk_distance_sq(a, bt, n_particles) : 0.0;
  const double fr_leg = fr_distance_sq(bt, b);
  return 2.0 * (mk_leg + fr_leg);
}

DiscreteMeasure fr_geodesic(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            double t) {
  check_same_grid(a, b, "fr_geodesic");
  require(t >= 0.0 && t <= 1.0, ErrorCode::bad_parameter,
          "fr_geodesic parameter t must lie in [0, 1]");
  std::vector<double> rho(a.density.size());
  for (size_t i = 0; i < rho.size(); ++i) {
    const double s =
        (1.0 - t) * std::sqrt(a.density[i]) + t * std::sqrt(b.density[i]);
    rho[i] = s * s;
  }
  return DiscreteMeasure(a.grid, std::move(rho));
}

}  // namespace kfr
