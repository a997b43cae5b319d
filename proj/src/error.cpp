#include "egoloc/error.hpp"

namespace egoloc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorCode::InvalidPose: return "InvalidPose";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::FieldOfView: return "FieldOfView";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptyPeaks: return "EmptyPeaks";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::InsufficientInliers: return "InsufficientInliers";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnmatchedQuery: return "UnmatchedQuery";
    case ErrorCode::InfeasiblePlacement: return "InfeasiblePlacement";
    case ErrorCode::NeverVisible: return "NeverVisible";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::Io: return "Io";
  }
  return "UnknownError";
}

}  // namespace egoloc
