#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kfr/driver.hpp"
#include "kfr/energy.hpp"
#include "kfr/grid.hpp"

namespace kfr {

/// Flat key-value run configuration (dotted section keys, `#` comments).
/// Parsing validates names, numeric ranges and referenced files before any
/// computation; serialize() round-trips to an identical run.
struct RunConfig {
  // grid.*
  double grid_left = 0.0;
  double grid_right = 1.0;
  int grid_n_cells = 100;

  // initial.*
  std::string initial_kind = "uniform";  // uniform|bump|two_bumps|from_csv
  double initial_value = 1.0;            // uniform
  double initial_center = 0.0;
  double initial_width = 0.2;
  double initial_height = 1.0;
  double initial_separation = 0.5;  // two_bumps
  std::string initial_path;         // from_csv

  // energy.*
  std::string energy_internal = "quadratic";  // power_m|quadratic|zero|boltzmann
  double energy_m = 2.0;
  std::string energy_psi = "zero";  // zero|quadratic_well|linear|from_csv
  std::string energy_psi_path;
  std::string energy_kernel = "zero";  // zero|gaussian_kernel|from_csv
  double energy_kernel_sigma = 0.3;
  std::string energy_kernel_path;
  std::optional<double> energy_inf_f;
  bool energy_allow_non_h = false;

  // scheme.*
  SchemeParams scheme;

  // output.*
  std::string output_directory = "out";
  std::vector<double> output_snapshot_times;

  // study.*
  std::vector<double> study_tau_list;
  std::vector<int> study_n_cells_list;
  std::string study_norm = "l1";

  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_string(const std::string& text);
  std::string serialize() const;

  Grid build_grid() const;
  DiscreteMeasure build_initial(const Grid& grid) const;
  EnergySpec build_spec(const Grid& grid) const;
};

}  // namespace kfr
