#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rppg {

enum class ErrorCode {
  // usage
  Usage,
  // data errors
  ShapeMismatch,
  EmptyClip,
  NonPositiveFps,
  MissingDir,
  DecodeFailure,
  Io,
  WrongPointCount,
  FrameCountMismatch,
  InsufficientCoverage,
  ClipTooShort,
  EmptyInput,
  DegenerateRegion,
  SizeMismatch,
  BadPatchSize,
  BadKernel,
  BadDims,
  LengthMismatch,
  FsTooLow,
  TooShort,
  HrOutOfRange,
  RangeViolation,
  InvalidKey,
  InvalidArgument,
  // numeric degeneracy
  ZeroChannel,
  ZeroVariance,
};

/// Stable snake-case name used in machine-readable error output.
std::string_view error_code_name(ErrorCode code);

/// Process exit status for a code: 2 usage, 3 data error, 4 numeric degeneracy.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rppg
