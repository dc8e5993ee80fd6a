#pragma once

#include <string>
#include <vector>

#include "kfr/diagnostics.hpp"
#include "kfr/driver.hpp"
#include "kfr/grid.hpp"

namespace kfr {

/// Measures serialize as `x,density`, one row per cell, 17 significant
/// digits on the cell-center x.
void write_measure_csv(const std::string& path, const DiscreteMeasure& m);
DiscreteMeasure read_measure_csv(const std::string& path);

/// Column samples `x,value` aligned with a grid's cell centers.
std::vector<double> read_samples_csv(const std::string& path, const Grid& grid);

/// Kernel samples `z,value` on the difference lattice d*h, d = 0..n-1.
std::vector<double> read_kernel_csv(const std::string& path, const Grid& grid);

void write_reports_csv(const std::string& path, const Trajectory& traj);
void write_study_csv(const std::string& path, const std::vector<StudyRow>& rows);
void write_edi_csv(const std::string& path, const EdiReport& report);

std::string format_double(double v);  // 17 significant digits

}  // namespace kfr
