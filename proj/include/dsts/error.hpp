#pragma once

#include <stdexcept>
#include <string>

namespace dsts {

enum class ErrorCode {
  kInvalidArgument,
  kFileNotFound,
  kMalformedModel,
  kTapShapeMismatch,
  kInferenceFailure,
  kImageTooSmall,
  kShapeMismatch,
  kDegenerateInput,
  kEmptyResult,
  kCorpusTooSmall,
  kFactorizationFailed,
  kIllConditioned,
  kDimensionMismatch,
  kVersionMismatch,
  kChecksumError,
  kIoError,
  kIdMismatch,
  kInsufficientRatings,
  kConstantInput,
};

const char* to_string(ErrorCode code);

// Single exception type for the engine; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsts
