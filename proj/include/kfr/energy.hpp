#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kfr/grid.hpp"

namespace kfr {

/// Internal energy density U with U(0) = 0. The catalog covers the
/// porous-medium family rho^m/(m-1), the quadratic special case, the zero
/// energy, the Boltzmann entropy (flagged non-(H)) and user callables.
class InternalEnergy {
 public:
  enum class Kind { power, zero, boltzmann, custom };

  static InternalEnergy power(double m);  // U = rho^m/(m-1), m > 1
  static InternalEnergy quadratic() { return power(2.0); }
  static InternalEnergy zero();
  static InternalEnergy boltzmann();  // rho*log(rho) - rho
  static InternalEnergy custom(std::string name,
                               std::function<double(double)> u,
                               std::function<double(double)> du,
                               std::function<double(double)> d2u);

  double value(double rho) const;
  double deriv(double rho) const;
  double second_deriv(double rho) const;  // meaningful for rho > 0

  Kind kind() const { return kind_; }
  double exponent() const { return m_; }  // power kind only
  const std::string& name() const { return name_; }

  /// Catalog members known to satisfy hypothesis (H) a priori.
  bool catalog_h() const { return kind_ == Kind::power || kind_ == Kind::zero; }

 private:
  InternalEnergy() = default;
  Kind kind_ = Kind::zero;
  double m_ = 0.0;
  std::string name_ = "zero";
  std::function<double(double)> u_, du_, d2u_;
};

double pressure(const InternalEnergy& internal, double rho);  // rho*U' - U

/// Driving functional F(rho) = int { U(rho) + Psi*rho + (1/2) rho K*rho }.
/// Psi is sampled at cell centers; the kernel is sampled on the lattice of
/// cell-center differences and stored by |i-j| (evenness is structural).
struct EnergySpec {
  InternalEnergy internal = InternalEnergy::zero();
  std::vector<double> psi;     // empty means Psi == 0, else size n_cells
  std::vector<double> kernel;  // empty means K == 0, else kernel[d] = K(d*h)
  std::optional<double> inf_f_override;  // user-supplied lower bound for F

  bool has_psi() const { return !psi.empty(); }
  bool has_kernel() const { return !kernel.empty(); }

  /// Validates an explicit lattice sample K((i-j)*h), i-j = -(n-1)..(n-1),
  /// against evenness and folds it to the |i-j| representation.
  static std::vector<double> fold_kernel_lattice(
      const std::vector<double>& full, int n_cells);
};

void check_spec_compatible(const EnergySpec& spec, const Grid& grid,
                           const char* where);

double energy(const DiscreteMeasure& m, const EnergySpec& spec);

/// Per-cell F'(rho) = U'(rho_i) + Psi_i + h * sum_j K_{|i-j|} rho_j.
std::vector<double> first_variation(const DiscreteMeasure& m,
                                    const EnergySpec& spec);

/// h * sum_j K_{|i-j|} rho_j for every cell (zero vector for empty kernel).
std::vector<double> kernel_convolution(const DiscreteMeasure& m,
                                       const EnergySpec& spec);

struct HypothesisReport {
  bool satisfies_h = false;
  bool mk_displacement_convex = false;
  double fr_convexity_lambda = 0.0;  // sampled inf of rho*U'' + U'/2
  std::string notes;
};

/// Sample-based check of hypothesis (H), McCann's displacement convexity
/// condition rho*P' >= (1 - 1/d) P, and the FR convexity modulus.
HypothesisReport check_hypotheses(const EnergySpec& spec, double rho_max,
                                  int d);

/// C^1 evaluator reconstructed from samples at the grid's cell centers:
/// the derivative is the linear interpolation of second-order finite
/// difference slopes, the value is its exact integral anchored at the first
/// sample. Exact for quadratics; slope is clamped outside the sampled range.
class SampledPotential {
 public:
  SampledPotential(const Grid& grid, const std::vector<double>& values);

  double value(double x) const;
  double slope(double x) const;
  double curvature(double x) const;  // piecewise-constant slope of slope

 private:
  double x0_, h_;
  std::vector<double> values_, slopes_, anchors_;
};

/// Even kernel z -> K(z) from samples K(d*h), d = 0..n-1, with odd slope
/// (K'(0) = 0 structurally). Same reconstruction as SampledPotential.
class SampledKernel {
 public:
  SampledKernel(double h, const std::vector<double>& samples);

  double value(double z) const;
  double slope(double z) const;      // odd in z
  double curvature(double z) const;  // even in z

 private:
  double h_;
  std::vector<double> samples_, slopes_, anchors_;
};

}  // namespace kfr
