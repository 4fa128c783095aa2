#pragma once

#include <stdexcept>
#include <string>

namespace drm {

enum class ErrorCode {
  NonScalarOutput,
  NonFiniteValue,
  ShapeMismatch,
  ZeroMatrix,
  NonPositiveRatio,
  DegenerateConstraint,
  SingularSystem,
  UnknownShape,
  ParseError,
  UnknownKey,
  RangeError,
  IoError,
};

const char* to_string(ErrorCode code);

// Every failure in the library is reported through this type. The code is
// stable and meant for programmatic checks; what() carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drm
