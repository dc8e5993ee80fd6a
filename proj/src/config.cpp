#include "kfr/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kfr/csv.hpp"

namespace kfr {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    require(pos == v.size(), ErrorCode::config_error, "");
    return d;
  } catch (...) {
    raise(ErrorCode::config_error, "invalid number for " + key + ": " + v);
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int i = std::stoi(v, &pos);
    require(pos == v.size(), ErrorCode::config_error, "");
    return i;
  } catch (...) {
    raise(ErrorCode::config_error, "invalid integer for " + key + ": " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  raise(ErrorCode::config_error, "invalid boolean for " + key + ": " + v);
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  return out;
}

void check_file_exists(const std::string& key, const std::string& path) {
  require(std::filesystem::exists(path), ErrorCode::config_error,
          key + " refers to a missing file: " + path);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    if constexpr (std::is_same_v<T, double>)
      out << format_double(v[i]);
    else
      out << v[i];
  }
  return out.str();
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config_error, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str());
}

RunConfig RunConfig::parse_string(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::config_error,
            "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "grid.left") cfg.grid_left = parse_double(key, value);
    else if (key == "grid.right") cfg.grid_right = parse_double(key, value);
    else if (key == "grid.n_cells") cfg.grid_n_cells = parse_int(key, value);
    else if (key == "initial.kind") cfg.initial_kind = value;
    else if (key == "initial.value") cfg.initial_value = parse_double(key, value);
    else if (key == "initial.center") cfg.initial_center = parse_double(key, value);
    else if (key == "initial.width") cfg.initial_width = parse_double(key, value);
    else if (key == "initial.height") cfg.initial_height = parse_double(key, value);
    else if (key == "initial.separation")
      cfg.initial_separation = parse_double(key, value);
    else if (key == "initial.path") cfg.initial_path = value;
    else if (key == "energy.internal") cfg.energy_internal = value;
    else if (key == "energy.m") cfg.energy_m = parse_double(key, value);
    else if (key == "energy.psi") cfg.energy_psi = value;
    else if (key == "energy.psi_path") cfg.energy_psi_path = value;
    else if (key == "energy.kernel") cfg.energy_kernel = value;
    else if (key == "energy.kernel_sigma")
      cfg.energy_kernel_sigma = parse_double(key, value);
    else if (key == "energy.kernel_path") cfg.energy_kernel_path = value;
    else if (key == "energy.inf_f") cfg.energy_inf_f = parse_double(key, value);
    else if (key == "energy.allow_non_h")
      cfg.energy_allow_non_h = parse_bool(key, value);
    else if (key == "scheme.tau") cfg.scheme.tau = parse_double(key, value);
    else if (key == "scheme.t_final")
      cfg.scheme.t_final = parse_double(key, value);
    else if (key == "scheme.mk_enabled")
      cfg.scheme.mk_enabled = parse_bool(key, value);
    else if (key == "scheme.fr_enabled")
      cfg.scheme.fr_enabled = parse_bool(key, value);
    else if (key == "scheme.max_retained_states")
      cfg.scheme.max_retained_states = parse_int(key, value);
    else if (key == "scheme.mk.n_particles")
      cfg.scheme.mk_opts.n_particles = parse_int(key, value);
    else if (key == "scheme.mk.max_iters")
      cfg.scheme.mk_opts.max_iters = parse_int(key, value);
    else if (key == "scheme.mk.grad_tol")
      cfg.scheme.mk_opts.grad_tol = parse_double(key, value);
    else if (key == "scheme.mk.monotonicity_eps")
      cfg.scheme.mk_opts.monotonicity_eps = parse_double(key, value);
    else if (key == "scheme.fr.newton_tol")
      cfg.scheme.fr_opts.newton_tol = parse_double(key, value);
    else if (key == "scheme.fr.max_newton_iters")
      cfg.scheme.fr_opts.max_newton_iters = parse_int(key, value);
    else if (key == "scheme.fr.interaction_mode") {
      if (value == "frozen")
        cfg.scheme.fr_opts.interaction_mode =
            FrSolverOptions::InteractionMode::frozen;
      else if (value == "fixed_point")
        cfg.scheme.fr_opts.interaction_mode =
            FrSolverOptions::InteractionMode::fixed_point;
      else
        raise(ErrorCode::config_error,
              "scheme.fr.interaction_mode must be frozen or fixed_point");
    } else if (key == "scheme.fr.max_outer")
      cfg.scheme.fr_opts.max_outer = parse_int(key, value);
    else if (key == "scheme.fr.outer_tol")
      cfg.scheme.fr_opts.outer_tol = parse_double(key, value);
    else if (key == "scheme.fr.cfl_override")
      cfg.scheme.fr_opts.cfl_override = parse_bool(key, value);
    else if (key == "output.directory") cfg.output_directory = value;
    else if (key == "output.snapshot_times")
      cfg.output_snapshot_times = parse_double_list(key, value);
    else if (key == "study.tau_list")
      cfg.study_tau_list = parse_double_list(key, value);
    else if (key == "study.n_cells_list")
      cfg.study_n_cells_list = parse_int_list(key, value);
    else if (key == "study.norm") cfg.study_norm = value;
    else
      raise(ErrorCode::config_error, "unknown config key: " + key);
  }

  // Name and range validation up front, before any computation.
  require(cfg.grid_right > cfg.grid_left, ErrorCode::config_error,
          "grid.right must exceed grid.left");
  require(cfg.grid_n_cells >= 2, ErrorCode::config_error,
          "grid.n_cells must be at least 2");
  require(cfg.scheme.tau > 0.0, ErrorCode::config_error,
          "scheme.tau must be positive");
  require(cfg.scheme.t_final >= cfg.scheme.tau, ErrorCode::config_error,
          "scheme.t_final must be at least tau");
  require(cfg.scheme.mk_enabled || cfg.scheme.fr_enabled,
          ErrorCode::config_error, "at least one substep must be enabled");
  require(cfg.initial_kind == "uniform" || cfg.initial_kind == "bump" ||
              cfg.initial_kind == "two_bumps" || cfg.initial_kind == "from_csv",
          ErrorCode::config_error,
          "initial.kind must be uniform, bump, two_bumps or from_csv");
  require(cfg.energy_internal == "power_m" ||
              cfg.energy_internal == "quadratic" ||
              cfg.energy_internal == "zero" ||
              cfg.energy_internal == "boltzmann",
          ErrorCode::config_error,
          "energy.internal must be power_m, quadratic, zero or boltzmann");
  require(cfg.energy_psi == "zero" || cfg.energy_psi == "quadratic_well" ||
              cfg.energy_psi == "linear" || cfg.energy_psi == "from_csv",
          ErrorCode::config_error,
          "energy.psi must be zero, quadratic_well, linear or from_csv");
  require(cfg.energy_kernel == "zero" ||
              cfg.energy_kernel == "gaussian_kernel" ||
              cfg.energy_kernel == "from_csv",
          ErrorCode::config_error,
          "energy.kernel must be zero, gaussian_kernel or from_csv");
  require(cfg.study_norm == "l1" || cfg.study_norm == "linf",
          ErrorCode::config_error, "study.norm must be l1 or linf");
  if (cfg.energy_internal == "power_m")
    require(cfg.energy_m > 1.0, ErrorCode::config_error,
            "energy.m must exceed 1");
  if (cfg.initial_kind == "from_csv")
    check_file_exists("initial.path", cfg.initial_path);
  if (cfg.energy_psi == "from_csv")
    check_file_exists("energy.psi_path", cfg.energy_psi_path);
  if (cfg.energy_kernel == "from_csv")
    check_file_exists("energy.kernel_path", cfg.energy_kernel_path);
  cfg.scheme.fr_opts.allow_non_h = cfg.energy_allow_non_h;
  return cfg;
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "grid.left = " << format_double(grid_left) << '\n';
  out << "grid.right = " << format_double(grid_right) << '\n';
  out << "grid.n_cells = " << grid_n_cells << '\n';
  out << "initial.kind = " << initial_kind << '\n';
  out << "initial.value = " << format_double(initial_value) << '\n';
  out << "initial.center = " << format_double(initial_center) << '\n';
  out << "initial.width = " << format_double(initial_width) << '\n';
  out << "initial.height = " << format_double(initial_height) << '\n';
  out << "initial.separation = " << format_double(initial_separation) << '\n';
  if (!initial_path.empty()) out << "initial.path = " << initial_path << '\n';
  out << "energy.internal = " << energy_internal << '\n';
  out << "energy.m = " << format_double(energy_m) << '\n';
  out << "energy.psi = " << energy_psi << '\n';
  if (!energy_psi_path.empty())
    out << "energy.psi_path = " << energy_psi_path << '\n';
  out << "energy.kernel = " << energy_kernel << '\n';
  out << "energy.kernel_sigma = " << format_double(energy_kernel_sigma) << '\n';
  if (!energy_kernel_path.empty())
    out << "energy.kernel_path = " << energy_kernel_path << '\n';
  if (energy_inf_f) out << "energy.inf_f = " << format_double(*energy_inf_f) << '\n';
  out << "energy.allow_non_h = " << (energy_allow_non_h ? "true" : "false")
      << '\n';
  out << "scheme.tau = " << format_double(scheme.tau) << '\n';
  out << "scheme.t_final = " << format_double(scheme.t_final) << '\n';
  out << "scheme.mk_enabled = " << (scheme.mk_enabled ? "true" : "false")
      << '\n';
  out << "scheme.fr_enabled = " << (scheme.fr_enabled ? "true" : "false")
      << '\n';
  out << "scheme.max_retained_states = " << scheme.max_retained_states << '\n';
  out << "scheme.mk.n_particles = " << scheme.mk_opts.n_particles << '\n';
  out << "scheme.mk.max_iters = " << scheme.mk_opts.max_iters << '\n';
  out << "scheme.mk.grad_tol = " << format_double(scheme.mk_opts.grad_tol)
      << '\n';
  out << "scheme.mk.monotonicity_eps = "
      << format_double(scheme.mk_opts.monotonicity_eps) << '\n';
  out << "scheme.fr.newton_tol = " << format_double(scheme.fr_opts.newton_tol)
      << '\n';
  out << "scheme.fr.max_newton_iters = " << scheme.fr_opts.max_newton_iters
      << '\n';
  out << "scheme.fr.interaction_mode = "
      << (scheme.fr_opts.interaction_mode ==
                  FrSolverOptions::InteractionMode::frozen
              ? "frozen"
              : "fixed_point")
      << '\n';
  out << "scheme.fr.max_outer = " << scheme.fr_opts.max_outer << '\n';
  out << "scheme.fr.outer_tol = " << format_double(scheme.fr_opts.outer_tol)
      << '\n';
  out << "scheme.fr.cfl_override = "
      << (scheme.fr_opts.cfl_override ? "true" : "false") << '\n';
  out << "output.directory = " << output_directory << '\n';
  if (!output_snapshot_times.empty())
    out << "output.snapshot_times = " << join(output_snapshot_times) << '\n';
  if (!study_tau_list.empty())
    out << "study.tau_list = " << join(study_tau_list) << '\n';
  if (!study_n_cells_list.empty())
    out << "study.n_cells_list = " << join(study_n_cells_list) << '\n';
  out << "study.norm = " << study_norm << '\n';
  return out.str();
}

Grid RunConfig::build_grid() const {
  return Grid(grid_left, grid_right, grid_n_cells);
}

DiscreteMeasure RunConfig::build_initial(const Grid& grid) const {
  if (initial_kind == "uniform") {
    require(initial_value >= 0.0, ErrorCode::config_error,
            "initial.value must be nonnegative");
    return measure_from_fn(grid, [&](double) { return initial_value; }).measure;
  }
  if (initial_kind == "bump") {
    const double c = initial_center, w = initial_width, a = initial_height;
    require(w > 0.0 && a >= 0.0, ErrorCode::config_error,
            "bump needs width > 0 and height >= 0");
    return measure_from_fn(grid, [&](double x) {
             const double z = (x - c) / w;
             return a * std::exp(-z * z);
           })
        .measure;
  }
  if (initial_kind == "two_bumps") {
    const double c = initial_center, w = initial_width, a = initial_height;
    const double s = initial_separation;
    require(w > 0.0 && a >= 0.0 && s > 0.0, ErrorCode::config_error,
            "two_bumps needs width > 0, height >= 0, separation > 0");
    return measure_from_fn(grid, [&](double x) {
             const double z1 = (x - (c - 0.5 * s)) / w;
             const double z2 = (x - (c + 0.5 * s)) / w;
             return a * std::exp(-z1 * z1) + 0.6 * a * std::exp(-z2 * z2);
           })
        .measure;
  }
  // from_csv: the file fixes its own grid; it must agree with grid.*.
  DiscreteMeasure m = read_measure_csv(initial_path);
  require(m.grid == grid, ErrorCode::config_error,
          "initial.path grid does not match grid.* settings");
  return m;
}

EnergySpec RunConfig::build_spec(const Grid& grid) const {
  EnergySpec spec;
  if (energy_internal == "power_m")
    spec.internal = InternalEnergy::power(energy_m);
  else if (energy_internal == "quadratic")
    spec.internal = InternalEnergy::quadratic();
  else if (energy_internal == "zero")
    spec.internal = InternalEnergy::zero();
  else
    spec.internal = InternalEnergy::boltzmann();

  if (energy_psi == "quadratic_well") {
    spec.psi.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) {
      const double x = grid.cell_center(i);
      spec.psi[i] = 0.5 * x * x;
    }
  } else if (energy_psi == "linear") {
    spec.psi.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) spec.psi[i] = grid.cell_center(i);
  } else if (energy_psi == "from_csv") {
    spec.psi = read_samples_csv(energy_psi_path, grid);
  }

  if (energy_kernel == "gaussian_kernel") {
    require(energy_kernel_sigma > 0.0, ErrorCode::config_error,
            "energy.kernel_sigma must be positive");
    spec.kernel.resize(grid.n_cells);
    for (int d = 0; d < grid.n_cells; ++d) {
      const double z = d * grid.h() / energy_kernel_sigma;
      spec.kernel[d] = std::exp(-0.5 * z * z);
    }
  } else if (energy_kernel == "from_csv") {
    spec.kernel = read_kernel_csv(energy_kernel_path, grid);
  }

  spec.inf_f_override = energy_inf_f;
  return spec;
}

}  // namespace kfr
