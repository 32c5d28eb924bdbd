#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coinflow {

enum class ErrorCode {
  invalid_size,
  connectivity,
  malformed_edge,
  empty_edge_set,
  invalid_state,
  invalid_parameter,
  degenerate_parameter,
  run_too_long,
  too_large,
  insufficient_data,
  no_unique_stationary,
  corrupted_state,
  invariant_breach,
  parse_error,
  capacity,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& what);

}  // namespace coinflow
