#include "dsts/error.hpp"

namespace dsts {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kFileNotFound: return "file not found";
    case ErrorCode::kMalformedModel: return "malformed model";
    case ErrorCode::kTapShapeMismatch: return "tap shape mismatch";
    case ErrorCode::kInferenceFailure: return "inference failure";
    case ErrorCode::kImageTooSmall: return "image too small";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kDegenerateInput: return "degenerate input";
    case ErrorCode::kEmptyResult: return "empty result";
    case ErrorCode::kCorpusTooSmall: return "corpus too small";
    case ErrorCode::kFactorizationFailed: return "factorization failed";
    case ErrorCode::kIllConditioned: return "ill-conditioned";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kChecksumError: return "checksum error";
    case ErrorCode::kIoError: return "i/o error";
    case ErrorCode::kIdMismatch: return "id mismatch";
    case ErrorCode::kInsufficientRatings: return "insufficient ratings";
    case ErrorCode::kConstantInput: return "constant input";
  }
  return "unknown error";
}

}  // namespace dsts
