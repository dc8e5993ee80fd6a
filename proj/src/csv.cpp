#include "kfr/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kfr {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::config_error, "cannot open " + path +
                                                   " for writing");
  return out;
}

std::vector<std::pair<double, double>> read_two_columns(
    const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config_error, "cannot open " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos)
        continue;  // header row
    }
    std::istringstream ss(line);
    double a, b;
    char comma;
    if (ss >> a >> comma >> b)
      rows.emplace_back(a, b);
    else
      raise(ErrorCode::config_error, "malformed CSV row in " + path);
  }
  require(!rows.empty(), ErrorCode::config_error, path + " has no data rows");
  return rows;
}

}  // namespace

void write_measure_csv(const std::string& path, const DiscreteMeasure& m) {
  std::ofstream out = open_out(path);
  out << "x,density\n";
  for (int i = 0; i < m.grid.n_cells; ++i)
    out << format_double(m.grid.cell_center(i)) << ','
        << format_double(m.density[i]) << '\n';
}

DiscreteMeasure read_measure_csv(const std::string& path) {
  const auto rows = read_two_columns(path);
  const int n = static_cast<int>(rows.size());
  require(n >= 2, ErrorCode::config_error,
          path + " must contain at least two cells");
  const double h = rows[1].first - rows[0].first;
  require(h > 0.0, ErrorCode::config_error, "cell centers must increase");
  for (int i = 1; i < n; ++i)
    require(std::abs(rows[i].first - rows[i - 1].first - h) <=
                1e-9 * std::max(1.0, std::abs(h)),
            ErrorCode::config_error, path + " is not a uniform grid");
  Grid grid(rows[0].first - 0.5 * h, rows[n - 1].first + 0.5 * h, n);
  std::vector<double> rho(n);
  for (int i = 0; i < n; ++i) {
    require(rows[i].second >= 0.0, ErrorCode::config_error,
            path + " contains a negative density");
    rho[i] = rows[i].second;
  }
  return DiscreteMeasure(grid, std::move(rho));
}

std::vector<double> read_samples_csv(const std::string& path,
                                     const Grid& grid) {
  const auto rows = read_two_columns(path);
  require(static_cast<int>(rows.size()) == grid.n_cells,
          ErrorCode::config_error,
          path + " must have one sample per grid cell");
  std::vector<double> values(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    require(std::abs(rows[i].first - grid.cell_center(static_cast<int>(i))) <=
                1e-9 * std::max(1.0, grid.h()),
            ErrorCode::config_error,
            path + " samples are not aligned with the grid cell centers");
    values[i] = rows[i].second;
  }
  return values;
}

std::vector<double> read_kernel_csv(const std::string& path, const Grid& grid) {
  const auto rows = read_two_columns(path);
  require(static_cast<int>(rows.size()) == grid.n_cells,
          ErrorCode::config_error,
          path + " must have one kernel sample per lattice offset");
  std::vector<double> values(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    require(std::abs(rows[i].first - static_cast<double>(i) * grid.h()) <=
                1e-9 * std::max(1.0, grid.h()),
            ErrorCode::config_error,
            path + " samples are not on the difference lattice d*h");
    values[i] = rows[i].second;
  }
  return values;
}

void write_reports_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "n,kind,dist_sq,energy_before,energy_after,el_residual,iterations\n";
  const auto row = [&](int n, const StepReport& r) {
    out << n << ',' << substep_name(r.kind) << ','
        << format_double(r.dist_sq_moved) << ','
        << format_double(r.energy_before) << ','
        << format_double(r.energy_after) << ','
        << format_double(r.el_residual) << ',' << r.iterations << '\n';
  };
  for (const TrajectoryStep& step : traj.steps) {
    row(step.index, step.mk_report);
    row(step.index, step.fr_report);
  }
}

void write_study_csv(const std::string& path,
                     const std::vector<StudyRow>& rows) {
  std::ofstream out = open_out(path);
  out << "tau,h,norm,error,observed_order\n";
  for (const StudyRow& r : rows)
    out << format_double(r.tau) << ',' << format_double(r.h) << ','
        << (r.norm == Norm::l1 ? "l1" : "linf") << ','
        << format_double(r.error) << ',' << format_double(r.observed_order)
        << '\n';
}

void write_edi_csv(const std::string& path, const EdiReport& report) {
  std::ofstream out = open_out(path);
  out << "t1,t2,f_t1,f_t2,dissipation_integral,slack\n";
  for (const EdiEntry& e : report.entries)
    out << format_double(e.t1) << ',' << format_double(e.t2) << ','
        << format_double(e.f_t1) << ',' << format_double(e.f_t2) << ','
        << format_double(e.dissipation_integral) << ','
        << format_double(e.slack) << '\n';
}

}  // namespace kfr
