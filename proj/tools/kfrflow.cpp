// kfrflow: CLI front end for the Kantorovich-Fisher-Rao splitting solver.
//
// Subcommands: run, study, distance, dirac-distance, check-energy.
// Exit codes: 0 success, 2 config error, 3 solver failure, 4 precondition
// violation.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kfr/config.hpp"
#include "kfr/csv.hpp"
#include "kfr/diagnostics.hpp"
#include "kfr/driver.hpp"
#include "kfr/metrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitPrecondition = 4;

int exit_code_for(const kfr::Error& e) {
  switch (e.code()) {
    case kfr::ErrorCode::config_error:
      return kExitConfig;
    case kfr::ErrorCode::cfl_violation:
    case kfr::ErrorCode::bad_parameter:
    case kfr::ErrorCode::zero_mass:
    case kfr::ErrorCode::mass_mismatch:
    case kfr::ErrorCode::grid_mismatch:
    case kfr::ErrorCode::out_of_domain:
    case kfr::ErrorCode::out_of_range:
    case kfr::ErrorCode::stability_violation:
      return kExitPrecondition;
    default:
      return kExitSolver;
  }
}

void print_error(const kfr::Error& e) {
  json err;
  err["error"] = kfr::error_code_name(e.code());
  err["message"] = e.what();
  std::cout << err.dump(2) << std::endl;
}

kfr::Error classify_failure(const std::string& message) {
  // Trajectory failures carry the original "code: message" text.
  for (auto code : {kfr::ErrorCode::cfl_violation, kfr::ErrorCode::zero_mass,
                    kfr::ErrorCode::bracket_failure,
                    kfr::ErrorCode::newton_failure}) {
    if (message.rfind(kfr::error_code_name(code), 0) == 0)
      return kfr::Error(code, message);
  }
  return kfr::Error(kfr::ErrorCode::solver_failure, message);
}

std::vector<double> default_checkpoints(double t_final) {
  std::vector<double> cps;
  for (int i = 0; i <= 5; ++i) cps.push_back(t_final * i / 5.0);
  return cps;
}

int cmd_run(const std::string& config_path, std::string out_dir, bool quiet) {
  const kfr::RunConfig cfg = kfr::RunConfig::parse_file(config_path);
  if (out_dir.empty()) out_dir = cfg.output_directory;
  fs::create_directories(out_dir);

  const kfr::Grid grid = cfg.build_grid();
  const kfr::DiscreteMeasure rho0 = cfg.build_initial(grid);
  const kfr::EnergySpec spec = cfg.build_spec(grid);

  const kfr::Trajectory traj = kfr::run_splitting(rho0, spec, cfg.scheme);
  kfr::write_reports_csv((fs::path(out_dir) / "reports.csv").string(), traj);
  if (traj.failed) throw classify_failure(traj.failure_message);

  for (double t : cfg.output_snapshot_times) {
    const auto [half, full] = kfr::interpolants(traj, t);
    std::ostringstream name;
    name << "snapshot_t" << t << ".csv";
    kfr::write_measure_csv((fs::path(out_dir) / name.str()).string(), full);
  }
  const auto [half_final, full_final] = kfr::interpolants(traj, cfg.scheme.t_final);
  kfr::write_measure_csv((fs::path(out_dir) / "final.csv").string(), full_final);

  const kfr::DistanceBudget budget = kfr::total_square_distance_report(traj, spec);
  std::vector<double> cps = cfg.output_snapshot_times;
  if (cps.size() < 2) cps = default_checkpoints(cfg.scheme.t_final);
  if (cps.front() > 0.0) cps.insert(cps.begin(), 0.0);
  const kfr::EdiReport edi = kfr::edi_report(traj, spec, cps);
  kfr::write_edi_csv((fs::path(out_dir) / "edi.csv").string(), edi);

  double max_mk_res = 0.0, max_fr_res = 0.0;
  double slack_min = 0.0, slack_max = 0.0;
  std::vector<std::string> warnings = budget.warnings;
  for (const kfr::TrajectoryStep& step : traj.steps) {
    max_mk_res = std::max(max_mk_res, step.mk_report.el_residual);
    max_fr_res = std::max(max_fr_res, step.fr_report.el_residual);
    for (const auto& w : step.mk_report.warnings) warnings.push_back(w);
    for (const auto& w : step.fr_report.warnings) warnings.push_back(w);
  }
  if (!edi.entries.empty()) {
    slack_min = slack_max = edi.entries.front().slack;
    for (const kfr::EdiEntry& e : edi.entries) {
      slack_min = std::min(slack_min, e.slack);
      slack_max = std::max(slack_max, e.slack);
    }
  }
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());

  json summary;
  summary["schema_version"] = 1;
  summary["n_steps"] = traj.n_steps();
  summary["final_mass"] = kfr::total_mass(full_final);
  summary["final_energy"] = kfr::energy(full_final, spec);
  summary["sum_mk_sq"] = budget.sum_mk_sq;
  summary["sum_fr_sq"] = budget.sum_fr_sq;
  summary["distance_bound"] = budget.bound;
  summary["distance_bound_satisfied"] = budget.satisfied;
  summary["edi_slack_min"] = slack_min;
  summary["edi_slack_max"] = slack_max;
  summary["edi_hypotheses_certified"] = edi.hypotheses_certified;
  summary["max_mk_el_residual"] = max_mk_res;
  summary["max_fr_el_residual"] = max_fr_res;
  summary["warnings"] = warnings;

  std::ofstream sum_out(fs::path(out_dir) / "summary.json");
  sum_out << summary.dump(2) << '\n';

  if (!quiet) {
    std::cout << "run complete: " << traj.n_steps() << " steps, final mass "
              << kfr::format_double(kfr::total_mass(full_final))
              << ", final energy "
              << kfr::format_double(kfr::energy(full_final, spec)) << "\n"
              << "outputs in " << out_dir << std::endl;
  }
  return kExitOk;
}

int cmd_study(const std::string& config_path, std::string out_dir, bool quiet) {
  const kfr::RunConfig cfg = kfr::RunConfig::parse_file(config_path);
  kfr::require(!cfg.study_tau_list.empty() && !cfg.study_n_cells_list.empty(),
               kfr::ErrorCode::config_error,
               "study requires study.tau_list and study.n_cells_list");
  if (out_dir.empty()) out_dir = cfg.output_directory;
  fs::create_directories(out_dir);

  kfr::StudyConfig study;
  study.left = cfg.grid_left;
  study.right = cfg.grid_right;
  study.initial = [&cfg](const kfr::Grid& g) { return cfg.build_initial(g); };
  study.make_spec = [&cfg](const kfr::Grid& g) { return cfg.build_spec(g); };
  study.t_final = cfg.scheme.t_final;
  study.scheme = cfg.scheme;
  study.norm = cfg.study_norm == "linf" ? kfr::Norm::linf : kfr::Norm::l1;

  const std::vector<kfr::StudyRow> rows =
      kfr::convergence_study(study, cfg.study_tau_list, cfg.study_n_cells_list);
  const std::string path = (fs::path(out_dir) / "study.csv").string();
  kfr::write_study_csv(path, rows);
  if (!quiet) {
    for (const kfr::StudyRow& r : rows)
      std::cout << "tau=" << r.tau << " h=" << r.h
                << " error=" << kfr::format_double(r.error)
                << " order=" << kfr::format_double(r.observed_order) << "\n";
    std::cout << "study table written to " << path << std::endl;
  }
  return kExitOk;
}

int cmd_distance(const std::string& file_a, const std::string& file_b,
                 int n_particles) {
  const kfr::DiscreteMeasure a = kfr::read_measure_csv(file_a);
  const kfr::DiscreteMeasure b = kfr::read_measure_csv(file_b);
  json out;
  const double ma = kfr::total_mass(a), mb = kfr::total_mass(b);
  if (ma > 0.0 && mb > 0.0 && std::abs(ma - mb) <= 1e-10 * std::max(ma, mb))
    out["mk_sq"] = kfr::mk_distance_sq(a, b, n_particles);
  else
    out["mk_sq"] = nullptr;  // undefined for unequal masses
  out["fr_sq"] = kfr::fr_distance_sq(a, b);
  out["kfr_upper_sq"] = kfr::kfr_upper_bound_sq(a, b, n_particles);
  std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

int cmd_dirac_distance(double k0, double x0, double k1, double x1) {
  json out;
  out["kfr_sq"] = kfr::kfr_dirac_sq({x0, k0}, {x1, k1});
  std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

int cmd_check_energy(const std::string& config_path) {
  const kfr::RunConfig cfg = kfr::RunConfig::parse_file(config_path);
  const kfr::Grid grid = cfg.build_grid();
  const kfr::DiscreteMeasure rho0 = cfg.build_initial(grid);
  const kfr::EnergySpec spec = cfg.build_spec(grid);
  const kfr::HypothesisReport rep =
      kfr::check_hypotheses(spec, std::max(1.0, kfr::linf(rho0)), 1);
  json out;
  out["satisfies_H"] = rep.satisfies_h;
  out["mk_displacement_convex"] = rep.mk_displacement_convex;
  out["fr_convexity_lambda"] = rep.fr_convexity_lambda;
  out["notes"] = rep.notes;
  std::cout << out.dump(2) << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kantorovich-Fisher-Rao splitting JKO solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, file_a, file_b;
  bool quiet = false;
  int n_particles = 2048;
  double k0 = 1.0, x0 = 0.0, k1 = 1.0, x1 = 0.0;

  CLI::App* run = app.add_subcommand("run", "run the splitting scheme");
  run->add_option("--config", config_path, "run configuration file")
      ->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_flag("--quiet", quiet, "suppress the human-readable summary");

  CLI::App* study = app.add_subcommand("study", "tau/h convergence study");
  study->add_option("--config", config_path, "run configuration file")
      ->required();
  study->add_option("--out", out_dir, "output directory (overrides config)");
  study->add_flag("--quiet", quiet, "suppress the study table");

  CLI::App* dist =
      app.add_subcommand("distance", "distances between two measure CSVs");
  dist->add_option("file_a", file_a, "first measure CSV")->required();
  dist->add_option("file_b", file_b, "second measure CSV")->required();
  dist->add_option("--n-particles", n_particles, "quantile resolution");

  CLI::App* dirac =
      app.add_subcommand("dirac-distance", "one-point KFR distance");
  dirac->add_option("k0", k0, "first weight")->required();
  dirac->add_option("x0", x0, "first position")->required();
  dirac->add_option("k1", k1, "second weight")->required();
  dirac->add_option("x1", x1, "second position")->required();

  CLI::App* check =
      app.add_subcommand("check-energy", "print the hypothesis report");
  check->add_option("--config", config_path, "run configuration file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, quiet);
    if (study->parsed()) return cmd_study(config_path, out_dir, quiet);
    if (dist->parsed()) return cmd_distance(file_a, file_b, n_particles);
    if (dirac->parsed()) return cmd_dirac_distance(k0, x0, k1, x1);
    if (check->parsed()) return cmd_check_energy(config_path);
  } catch (const kfr::Error& e) {
    print_error(e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    json err;
    err["error"] = "internal";
    err["message"] = e.what();
    std::cout << err.dump(2) << std::endl;
    return kExitSolver;
  }
  return kExitOk;
}
