#include "textcue/error.hpp"

namespace textcue {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kFormat: return "FormatError";
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kDegenerateBox: return "DegenerateBox";
    case ErrorCode::kValue: return "ValueError";
    case ErrorCode::kRange: return "RangeError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kJudgeTransport: return "JudgeTransportError";
    case ErrorCode::kJudgeParse: return "JudgeParseError";
    case ErrorCode::kDuplicateResponse: return "DuplicateResponse";
    case ErrorCode::kUnknownSample: return "UnknownSample";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnsupportedAngle: return "UnsupportedAngle";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace textcue
