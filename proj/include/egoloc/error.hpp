#pragma once

#include <stdexcept>
#include <string>

namespace egoloc {

// Typed failure conditions surfaced by the library. The CLI maps
// SchemaError/Io/InvalidArgument to exit code 2 and everything else to 3.
enum class ErrorCode {
  InvalidArgument,
  InvalidIntrinsics,
  InvalidPose,
  NonPositiveDepth,
  NoConvergence,
  FieldOfView,
  InvalidKernel,
  TooShort,
  EmptyPeaks,
  EmptyInput,
  Degenerate,
  InsufficientInliers,
  ZeroVector,
  UnmatchedQuery,
  InfeasiblePlacement,
  NeverVisible,
  SchemaError,
  Io,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace egoloc
