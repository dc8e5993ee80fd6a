#pragma once

#include <string>
#include <vector>

namespace kfr {

enum class SubstepKind { mk, fr };

inline const char* substep_name(SubstepKind k) {
  return k == SubstepKind::mk ? "MK" : "FR";
}

/// Per-substep record. Energies are the Eulerian F of the in/out states so
/// reports chain monotonically across substeps.
struct StepReport {
  SubstepKind kind = SubstepKind::mk;
  double dist_sq_moved = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double el_residual = 0.0;
  int iterations = 0;
  std::vector<std::string> warnings;
};

}  // namespace kfr
