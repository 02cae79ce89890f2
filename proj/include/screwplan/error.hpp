#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace screwplan {

/// Machine-readable failure categories shared by every module.
enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  ParseError,
  InconsistentLimits,
  PathTooShort,
  NonConvergence,
  DegenerateGeometry,
  AvoidanceFailure,
  Unreachable,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace screwplan
