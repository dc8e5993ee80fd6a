// End-to-end checks of the kfrflow binary: exit codes, JSON outputs, CSV
// artifacts.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kfr/csv.hpp"
#include "kfr/grid.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  const std::string out_path =
      (fs::temp_directory_path() / "kfr_cli_out.txt").string();
  const std::string cmd =
      std::string(KFR_CLI_PATH) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  CommandResult result;
  result.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  result.output = ss.str();
  return result;
}

std::string write_config(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path.string();
}

}  // namespace

TEST_CASE("dirac-distance values") {
  auto same = run_cli("dirac-distance 1 0 1 0");
  CHECK(same.exit_code == 0);
  CHECK(json::parse(same.output)["kfr_sq"].get<double>() ==
        doctest::Approx(0.0));

  auto pi = run_cli("dirac-distance 1 0 1 3.14159265");
  CHECK(pi.exit_code == 0);
  CHECK(json::parse(pi.output)["kfr_sq"].get<double>() ==
        doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("distance of a file against itself is zero") {
  kfr::Grid g(0.0, 1.0, 32);
  kfr::DiscreteMeasure m =
      kfr::measure_from_fn(g, [](double x) { return 1.0 + x; }).measure;
  const std::string path =
      (fs::temp_directory_path() / "kfr_cli_measure.csv").string();
  kfr::write_measure_csv(path, m);

  auto res = run_cli("distance " + path + " " + path);
  CHECK(res.exit_code == 0);
  const json out = json::parse(res.output);
  CHECK(out["mk_sq"].get<double>() == doctest::Approx(0.0));
  CHECK(out["fr_sq"].get<double>() == doctest::Approx(0.0));
  CHECK(out["kfr_upper_sq"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("run: minimal config exits 0 with a monotone energy series") {
  const std::string cfg = write_config("kfr_cli_min.cfg", R"(
grid.left = -1
grid.right = 1
grid.n_cells = 50
initial.kind = uniform
initial.value = 1.0
energy.internal = quadratic
scheme.tau = 1e-2
scheme.t_final = 0.1
output.snapshot_times = 0.05, 0.1
)");
  const std::string out_dir =
      (fs::temp_directory_path() / "kfr_cli_run").string();
  fs::remove_all(out_dir);
  auto res = run_cli("run --config " + cfg + " --out " + out_dir + " --quiet");
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(fs::path(out_dir) / "reports.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "summary.json"));
  CHECK(fs::exists(fs::path(out_dir) / "final.csv"));

  std::ifstream sum(fs::path(out_dir) / "summary.json");
  const json summary = json::parse(sum);
  CHECK(summary["schema_version"].get<int>() == 1);
  CHECK(summary["distance_bound_satisfied"].get<bool>());
  CHECK(summary["final_mass"].get<double>() < 2.0);

  // Energy column is monotone along the reports.
  std::ifstream reports(fs::path(out_dir) / "reports.csv");
  std::string line;
  std::getline(reports, line);  // header
  double prev = 1e300;
  while (std::getline(reports, line)) {
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // n
    std::getline(ss, field, ',');  // kind
    std::getline(ss, field, ',');  // dist_sq
    std::getline(ss, field, ',');  // energy_before
    const double before = std::stod(field);
    std::getline(ss, field, ',');  // energy_after
    const double after = std::stod(field);
    CHECK(before <= prev + 1e-8);
    CHECK(after <= before + 1e-8);
    prev = after;
  }
}

TEST_CASE("run: CFL violation exits 4 with the cfl_violation code") {
  const std::string cfg = write_config("kfr_cli_cfl.cfg", R"(
grid.left = 0
grid.right = 1
grid.n_cells = 16
initial.kind = uniform
initial.value = 1.0
energy.internal = quadratic
scheme.tau = 1.0
scheme.t_final = 2.0
scheme.mk_enabled = false
)");
  auto res = run_cli("run --config " + cfg + " --quiet");
  CHECK(res.exit_code == 4);
  CHECK(json::parse(res.output)["error"].get<std::string>() == "cfl_violation");
}

TEST_CASE("run: missing file exits 2 with config_error") {
  auto res = run_cli("run --config /nonexistent/kfr.cfg --quiet");
  CHECK(res.exit_code == 2);
  CHECK(json::parse(res.output)["error"].get<std::string>() == "config_error");
}

TEST_CASE("check-energy reports the hypothesis flags") {
  const std::string cfg = write_config("kfr_cli_energy.cfg", R"(
grid.left = 0
grid.right = 1
grid.n_cells = 16
initial.kind = uniform
initial.value = 1.0
energy.internal = boltzmann
scheme.tau = 1e-2
scheme.t_final = 0.1
)");
  auto res = run_cli("check-energy --config " + cfg);
  CHECK(res.exit_code == 0);
  const json out = json::parse(res.output);
  CHECK(!out["satisfies_H"].get<bool>());
  CHECK(out["mk_displacement_convex"].get<bool>());
}

TEST_CASE("study emits a CSV table") {
  const std::string cfg = write_config("kfr_cli_study.cfg", R"(
grid.left = -1
grid.right = 1
grid.n_cells = 64
initial.kind = bump
initial.center = 0
initial.width = 0.35
initial.height = 1.0
energy.internal = quadratic
scheme.tau = 2e-3
scheme.t_final = 0.02
study.tau_list = 4e-3, 2e-3
study.n_cells_list = 64
study.norm = l1
)");
  const std::string out_dir =
      (fs::temp_directory_path() / "kfr_cli_study").string();
  fs::remove_all(out_dir);
  auto res = run_cli("study --config " + cfg + " --out " + out_dir + " --quiet");
  CHECK(res.exit_code == 0);
  std::ifstream table(fs::path(out_dir) / "study.csv");
  std::string header;
  std::getline(table, header);
  CHECK(header == "tau,h,norm,error,observed_order");
  int rows = 0;
  std::string line;
  while (std::getline(table, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("shipped example config runs") {
  const std::string cfg = std::string(KFR_CONFIG_DIR) + "/minimal.cfg";
  const std::string out_dir =
      (fs::temp_directory_path() / "kfr_cli_shipped").string();
  fs::remove_all(out_dir);
  auto res = run_cli("run --config " + cfg + " --out " + out_dir + " --quiet");
  CHECK(res.exit_code == 0);
}
