#include "kfr/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kfr {

InternalEnergy InternalEnergy::power(double m) {
  require(m > 1.0, ErrorCode::bad_parameter,
          "power internal energy needs exponent m > 1");
  InternalEnergy e;
  e.kind_ = Kind::power;
  e.m_ = m;
  std::ostringstream name;
  name << "power_m(" << m << ")";
  e.name_ = name.str();
  return e;
}

InternalEnergy InternalEnergy::zero() {
  InternalEnergy e;
  e.kind_ = Kind::zero;
  e.name_ = "zero";
  return e;
}

InternalEnergy InternalEnergy::boltzmann() {
  InternalEnergy e;
  e.kind_ = Kind::boltzmann;
  e.name_ = "boltzmann";
  return e;
}

InternalEnergy InternalEnergy::custom(std::string name,
                                      std::function<double(double)> u,
                                      std::function<double(double)> du,
                                      std::function<double(double)> d2u) {
  InternalEnergy e;
  e.kind_ = Kind::custom;
  e.name_ = std::move(name);
  e.u_ = std::move(u);
  e.du_ = std::move(du);
  e.d2u_ = std::move(d2u);
  return e;
}

double InternalEnergy::value(double rho) const {
  switch (kind_) {
    case Kind::power:
      return std::pow(rho, m_) / (m_ - 1.0);
    case Kind::zero:
      return 0.0;
    case Kind::boltzmann:
      return rho > 0.0 ? rho * std::log(rho) - rho : 0.0;
    case Kind::custom:
      return u_(rho);
  }
  return 0.0;
}

double InternalEnergy::deriv(double rho) const {
  switch (kind_) {
    case Kind::power:
      return m_ / (m_ - 1.0) * std::pow(rho, m_ - 1.0);
    case Kind::zero:
      return 0.0;
    case Kind::boltzmann:
      return rho > 0.0 ? std::log(rho)
                       : -std::numeric_limits<double>::infinity();
    case Kind::custom:
      return du_(rho);
  }
  return 0.0;
}

double InternalEnergy::second_deriv(double rho) const {
  switch (kind_) {
    case Kind::power:
      return m_ * std::pow(rho, m_ - 2.0);
    case Kind::zero:
      return 0.0;
    case Kind::boltzmann:
      return rho > 0.0 ? 1.0 / rho : std::numeric_limits<double>::infinity();
    case Kind::custom:
      return d2u_(rho);
  }
  return 0.0;
}

double pressure(const InternalEnergy& internal, double rho) {
  if (rho == 0.0) return 0.0;
  return rho * internal.deriv(rho) - internal.value(rho);
}

std::vector<double> EnergySpec::fold_kernel_lattice(
    const std::vector<double>& full, int n_cells) {
  require(static_cast<int>(full.size()) == 2 * n_cells - 1,
          ErrorCode::bad_parameter,
          "kernel lattice must have 2*n_cells - 1 samples");
  const int c = n_cells - 1;  // index of z = 0
  std::vector<double> folded(n_cells);
  for (int d = 0; d < n_cells; ++d) {
    const double plus = full[c + d], minus = full[c - d];
    require(std::abs(plus - minus) <=
                1e-12 * std::max(1.0, std::max(std::abs(plus), std::abs(minus))),
            ErrorCode::bad_parameter, "kernel samples must be even in z");
    folded[d] = 0.5 * (plus + minus);
  }
  return folded;
}

void check_spec_compatible(const EnergySpec& spec, const Grid& grid,
                           const char* where) {
  if (spec.has_psi())
    require(static_cast<int>(spec.psi.size()) == grid.n_cells,
            ErrorCode::grid_mismatch,
            std::string(where) + ": psi samples do not match the grid");
  if (spec.has_kernel())
    require(static_cast<int>(spec.kernel.size()) == grid.n_cells,
            ErrorCode::grid_mismatch,
            std::string(where) + ": kernel samples do not match the grid");
}

std::vector<double> kernel_convolution(const DiscreteMeasure& m,
                                       const EnergySpec& spec) {
  const int n = m.grid.n_cells;
  std::vector<double> conv(n, 0.0);
  if (!spec.has_kernel()) return conv;
  const double h = m.grid.h();
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += spec.kernel[std::abs(i - j)] * m.density[j];
    conv[i] = h * s;
  }
  return conv;
}

double energy(const DiscreteMeasure& m, const EnergySpec& spec) {
  check_spec_compatible(spec, m.grid, "energy");
  const double h = m.grid.h();
  double acc = 0.0;
  for (int i = 0; i < m.grid.n_cells; ++i) {
    acc += spec.internal.value(m.density[i]);
    if (spec.has_psi()) acc += spec.psi[i] * m.density[i];
  }
  double e = h * acc;
  if (spec.has_kernel()) {
    const std::vector<double> conv = kernel_convolution(m, spec);
    double inter = 0.0;
    for (int i = 0; i < m.grid.n_cells; ++i) inter += m.density[i] * conv[i];
    e += 0.5 * h * inter;
  }
  return e;
}

std::vector<double> first_variation(const DiscreteMeasure& m,
                                    const EnergySpec& spec) {
  check_spec_compatible(spec, m.grid, "first_variation");
  std::vector<double> fv = kernel_convolution(m, spec);
  for (int i = 0; i < m.grid.n_cells; ++i) {
    fv[i] += spec.internal.deriv(m.density[i]);
    if (spec.has_psi()) fv[i] += spec.psi[i];
  }
  return fv;
}

HypothesisReport check_hypotheses(const EnergySpec& spec, double rho_max,
                                  int d) {
  require(rho_max > 0.0, ErrorCode::bad_parameter, "rho_max must be positive");
  require(d >= 1, ErrorCode::bad_parameter, "dimension d >= 1");
  const InternalEnergy& U = spec.internal;

  constexpr int kSamples = 256;
  const double lo = rho_max * 1e-8;
  std::vector<double> rhos(kSamples);
  for (int i = 0; i < kSamples; ++i)
    rhos[i] = lo * std::pow(rho_max / lo, double(i) / (kSamples - 1));

  HypothesisReport rep;
  std::ostringstream notes;
  notes << "sampled " << kSamples << " log-spaced densities in (0, " << rho_max
        << "]";

  bool u0_ok = std::abs(U.value(0.0)) <= 1e-14;
  bool du_ok = true, d2u_ok = true, rho_d2u_bounded = true;
  bool mk_ok = true;
  double fr_lambda = std::numeric_limits<double>::infinity();
  bool smooth = true;
  const double small_cap = std::min(1.0, rho_max);

  for (double r : rhos) {
    const double du = U.deriv(r);
    const double d2u = U.second_deriv(r);
    if (!std::isfinite(du) || !std::isfinite(d2u)) {
      smooth = false;
      continue;
    }
    if (du < -1e-12) du_ok = false;
    if (d2u < -1e-12) d2u_ok = false;
    if (r <= small_cap && r * d2u > 1e8) rho_d2u_bounded = false;
    const double p = pressure(U, r);
    const double dp = r * d2u;  // P'(rho) = rho U''(rho)
    if (r * dp - (1.0 - 1.0 / d) * p < -1e-12 * std::max(1.0, std::abs(p)))
      mk_ok = false;
    fr_lambda = std::min(fr_lambda, r * d2u + 0.5 * du);
  }

  rep.satisfies_h = u0_ok && du_ok && d2u_ok && rho_d2u_bounded && smooth;
  rep.mk_displacement_convex = mk_ok && smooth;
  rep.fr_convexity_lambda = std::isfinite(fr_lambda) ? fr_lambda : 0.0;

  if (!u0_ok) notes << "; U(0) != 0";
  if (!du_ok) notes << "; U' < 0 somewhere";
  if (!d2u_ok) notes << "; U'' < 0 somewhere";
  if (!rho_d2u_bounded) notes << "; rho*U'' unbounded near 0";
  if (!smooth) notes << "; non-finite derivatives at sampled densities";
  rep.notes = notes.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Sampled C^1 reconstructions.
// ---------------------------------------------------------------------------

namespace {

// Second-order slopes of samples v on a uniform lattice of spacing h.
std::vector<double> lattice_slopes(const std::vector<double>& v, double h) {
  const int n = static_cast<int>(v.size());
  std::vector<double> s(n, 0.0);
  if (n == 1) return s;
  if (n == 2) {
    s[0] = s[1] = (v[1] - v[0]) / h;
    return s;
  }
  for (int i = 1; i + 1 < n; ++i) s[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  s[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  s[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return s;
}

// Exact integrals of the piecewise-linear slope field, anchored at v[0].
std::vector<double> slope_anchors(const std::vector<double>& v,
                                  const std::vector<double>& s, double h) {
  std::vector<double> a(v.size());
  a[0] = v[0];
  for (size_t i = 1; i < v.size(); ++i)
    a[i] = a[i - 1] + 0.5 * (s[i - 1] + s[i]) * h;
  return a;
}

}  // namespace

SampledPotential::SampledPotential(const Grid& grid,
                                   const std::vector<double>& values)
    : x0_(grid.cell_center(0)), h_(grid.h()), values_(values) {
  require(static_cast<int>(values_.size()) == grid.n_cells,
          ErrorCode::grid_mismatch, "potential samples do not match the grid");
  slopes_ = lattice_slopes(values_, h_);
  anchors_ = slope_anchors(values_, slopes_, h_);
}

double SampledPotential::slope(double x) const {
  const int n = static_cast<int>(values_.size());
  const double t = (x - x0_) / h_;
  if (t <= 0.0) return slopes_[0];
  if (t >= n - 1) return slopes_[n - 1];
  const int i = static_cast<int>(t);
  const double f = t - i;
  return (1.0 - f) * slopes_[i] + f * slopes_[i + 1];
}

double SampledPotential::value(double x) const {
  const int n = static_cast<int>(values_.size());
  const double t = (x - x0_) / h_;
  if (t <= 0.0) return anchors_[0] + slopes_[0] * (x - x0_);
  if (t >= n - 1)
    return anchors_[n - 1] + slopes_[n - 1] * (x - (x0_ + (n - 1) * h_));
  const int i = static_cast<int>(t);
  const double dx = x - (x0_ + i * h_);
  const double ds = (slopes_[i + 1] - slopes_[i]) / h_;
  return anchors_[i] + slopes_[i] * dx + 0.5 * ds * dx * dx;
}

double SampledPotential::curvature(double x) const {
  const int n = static_cast<int>(values_.size());
  const double t = (x - x0_) / h_;
  if (t <= 0.0 || t >= n - 1) return 0.0;
  const int i = static_cast<int>(t);
  return (slopes_[i + 1] - slopes_[i]) / h_;
}

SampledKernel::SampledKernel(double h, const std::vector<double>& samples)
    : h_(h), samples_(samples) {
  require(!samples_.empty(), ErrorCode::bad_parameter, "empty kernel samples");
  require(h > 0.0, ErrorCode::bad_parameter, "kernel lattice spacing h > 0");
  const int n = static_cast<int>(samples_.size());
  slopes_.assign(n, 0.0);
  if (n >= 2) {
    // Even extension K(-h) = K(h) gives K'(0) = 0 structurally.
    for (int d = 1; d + 1 < n; ++d)
      slopes_[d] = (samples_[d + 1] - samples_[d - 1]) / (2.0 * h_);
    slopes_[0] = 0.0;
    if (n >= 3)
      slopes_[n - 1] =
          (3.0 * samples_[n - 1] - 4.0 * samples_[n - 2] + samples_[n - 3]) /
          (2.0 * h_);
    else
      slopes_[n - 1] = (samples_[1] - samples_[0]) / h_;
  }
  anchors_ = slope_anchors(samples_, slopes_, h_);
}

double SampledKernel::slope(double z) const {
  const double az = std::abs(z);
  const int n = static_cast<int>(samples_.size());
  const double t = az / h_;
  double s;
  if (t >= n - 1) {
    s = slopes_[n - 1];
  } else {
    const int i = static_cast<int>(t);
    const double f = t - i;
    s = (1.0 - f) * slopes_[i] + f * slopes_[i + 1];
  }
  return z >= 0.0 ? s : -s;
}

double SampledKernel::value(double z) const {
  const double az = std::abs(z);
  const int n = static_cast<int>(samples_.size());
  const double t = az / h_;
  if (t >= n - 1)
    return anchors_[n - 1] + slopes_[n - 1] * (az - (n - 1) * h_);
  const int i = static_cast<int>(t);
  const double dz = az - i * h_;
  const double ds = (slopes_[i + 1] - slopes_[i]) / h_;
  return anchors_[i] + slopes_[i] * dz + 0.5 * ds * dz * dz;
}

double SampledKernel::curvature(double z) const {
  const double az = std::abs(z);
  const int n = static_cast<int>(samples_.size());
  const double t = az / h_;
  if (t >= n - 1) return 0.0;
  const int i = static_cast<int>(t);
  return (slopes_[i + 1] - slopes_[i]) / h_;
}

}  // namespace kfr
