#include "kfr/errors.hpp"

namespace kfr {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::zero_mass: return "zero_mass";
    case ErrorCode::mass_mismatch: return "mass_mismatch";
    case ErrorCode::out_of_domain: return "out_of_domain";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::bad_parameter: return "bad_parameter";
    case ErrorCode::cfl_violation: return "cfl_violation";
    case ErrorCode::newton_failure: return "newton_failure";
    case ErrorCode::bracket_failure: return "bracket_failure";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::stability_violation: return "stability_violation";
    case ErrorCode::blowup: return "blowup";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::solver_failure: return "solver_failure";
  }
  return "unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

}  // namespace kfr
