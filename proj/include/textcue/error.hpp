#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace textcue {

// Numeric values are shared with the C API status codes and the CLI exit codes.
enum class ErrorCode : int {
  kFormat = 1,
  kShape = 2,
  kDegenerateBox = 3,
  kValue = 4,
  kRange = 5,
  kIo = 6,
  kJudgeTransport = 7,
  kJudgeParse = 8,
  kDuplicateResponse = 9,
  kUnknownSample = 10,
  kDimensionMismatch = 11,
  kZeroVector = 12,
  kEmptyInput = 13,
  kUnsupportedAngle = 14,
  kInvalidArgument = 15,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace textcue
