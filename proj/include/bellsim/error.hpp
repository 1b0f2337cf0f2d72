#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bellsim {

enum class ErrorCode {
  invalid_weights,
  codomain_violation,
  unknown_zoo_entry,
  invalid_model,
  station_mismatch,
  setting_off_grid,
  empty_table,
  invalid_tolerance,
  infeasible_mean,
  grid_mismatch,
  already_signed,
  infeasible_target,
  already_doubled,
  zero_trials,
  unsupported_size,
  invalid_schedule,
  config_error,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Operational errors that are caused by the caller's input rather than by the
/// model itself (bad options, unreadable files, unknown names).
bool is_config_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bellsim
