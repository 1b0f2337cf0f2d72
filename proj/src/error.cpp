#include "bellsim/error.hpp"

namespace bellsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_weights: return "invalid-weights";
    case ErrorCode::codomain_violation: return "codomain-violation";
    case ErrorCode::unknown_zoo_entry: return "unknown-zoo-entry";
    case ErrorCode::invalid_model: return "invalid-model";
    case ErrorCode::station_mismatch: return "station-mismatch";
    case ErrorCode::setting_off_grid: return "setting-off-grid";
    case ErrorCode::empty_table: return "empty-table";
    case ErrorCode::invalid_tolerance: return "invalid-tolerance";
    case ErrorCode::infeasible_mean: return "infeasible-mean";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::already_signed: return "already-signed";
    case ErrorCode::infeasible_target: return "infeasible-target";
    case ErrorCode::already_doubled: return "already-doubled";
    case ErrorCode::zero_trials: return "zero-trials";
    case ErrorCode::unsupported_size: return "unsupported-size";
    case ErrorCode::invalid_schedule: return "invalid-schedule";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

bool is_config_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_zoo_entry:
    case ErrorCode::invalid_tolerance:
    case ErrorCode::zero_trials:
    case ErrorCode::unsupported_size:
    case ErrorCode::invalid_schedule:
    case ErrorCode::setting_off_grid:
    case ErrorCode::config_error:
    case ErrorCode::io_error:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace bellsim
