#pragma once

#include <stdexcept>
#include <string>

namespace kfr {

enum class ErrorCode {
  grid_mismatch,
  zero_mass,
  mass_mismatch,
  out_of_domain,
  out_of_range,
  bad_parameter,
  cfl_violation,
  newton_failure,
  bracket_failure,
  non_convergence,
  stability_violation,
  blowup,
  config_error,
  solver_failure,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception carrying a machine-readable code (the CLI maps
/// codes onto exit statuses and error JSON).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) raise(code, message);
}

}  // namespace kfr
