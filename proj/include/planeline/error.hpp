#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace planeline {

enum class ErrorCode {
  kBehindCamera,
  kOutOfBounds,
  kEmptyRegion,
  kProjectionDegenerate,
  kShapeMismatch,
  kDegenerateDetection,
  kDegenerateSegment,
  kTooFewSamples,
  kEmptyInput,
  kBadDims,
  kBadConfig,
  kUnknownConfigKey,
  kBadArgument,
  kMissingFile,
  kMissingCamera,
  kMissingDepth,
  kMissingNormal,
  kMissingDetections,
  kParse,
  kWrite,
  kNumerical,
};

/// Process exit categories used by the command-line tool.
enum class ExitCategory { kValidation = 2, kIo = 3, kNumerical = 4 };

std::string_view error_code_name(ErrorCode code);
ExitCategory exit_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace planeline
