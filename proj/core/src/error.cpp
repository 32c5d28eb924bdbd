#include "coinflow/error.hpp"

namespace coinflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_size: return "invalid-size";
    case ErrorCode::connectivity: return "connectivity";
    case ErrorCode::malformed_edge: return "malformed-edge";
    case ErrorCode::empty_edge_set: return "empty-edge-set";
    case ErrorCode::invalid_state: return "invalid-state";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::degenerate_parameter: return "degenerate-parameter";
    case ErrorCode::run_too_long: return "run-too-long";
    case ErrorCode::too_large: return "too-large";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::no_unique_stationary: return "no-unique-stationary";
    case ErrorCode::corrupted_state: return "corrupted-state";
    case ErrorCode::invariant_breach: return "invariant-breach";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::capacity: return "capacity";
  }
  return "unknown";
}

void raise(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace coinflow
