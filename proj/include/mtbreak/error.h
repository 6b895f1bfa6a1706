#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mtbreak {

enum class ErrorCode {
  kMalformedRecord,
  kMissingField,
  kDuplicateInstanceId,
  kMissingScore,
  kNonFiniteScore,
  kRangeViolation,
  kUnknownInstanceId,
  kDuplicateScore,
  kInvalidMetric,
  kEmptyReference,
  kMixedTasks,
  kEmptySplit,
  kEmptyBackTranslation,
  kEmptyDev,
  kIdMismatch,
  kEmptyMatrix,
  kMisalignment,
  kMixedMetrics,
  kTooFewModels,
  kInvalidConfig,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this one exception type; callers
// branch on code() rather than on a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mtbreak
