#pragma once

#include "kfr/grid.hpp"

namespace kfr {

struct DiracMass {
  double position = 0.0;
  double weight = 0.0;  // k >= 0
};

/// Squared quadratic Monge-Kantorovich distance via the 1D quantile
/// identity, evaluated with a shared number of particles. Requires equal
/// masses (to 1e-10 relative) and positive mass.
double mk_distance_sq(const DiscreteMeasure& a, const DiscreteMeasure& b,
                      int n_particles);

/// Squared Fisher-Rao / Hellinger distance 4h * sum (sqrt(a) - sqrt(b))^2.
double fr_distance_sq(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// One-point KFR formula 4(k0 + k1 - 2 sqrt(k0 k1) cos(min(|dx|, pi)/2));
/// the angle is capped at pi (pure creation/annihilation past the cut).
double kfr_dirac_sq(const DiracMass& p, const DiracMass& q);

/// Two-leg upper bound 2(MK^2(a, bt) + FR^2(bt, b)) with bt = (|a|/|b|) b.
double kfr_upper_bound_sq(const DiscreteMeasure& a, const DiscreteMeasure& b,
                          int n_particles);

/// Point on the FR geodesic: [(1-t) sqrt(a) + t sqrt(b)]^2, t in [0, 1].
DiscreteMeasure fr_geodesic(const DiscreteMeasure& a, const DiscreteMeasure& b,
                            double t);

}  // namespace kfr
