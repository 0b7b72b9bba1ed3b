#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace binderlsc {

enum class ErrorCode {
  Parse,
  DuplicateKey,
  Config,
  Format,
  Data,
  Io,
  Validation,
  Divergence,
  Shape,
  InsufficientData,
  Range,
  UndefinedDistance,
  UndefinedCorrelation,
  EmptyUsage,
  MissingWord,
  Coverage,
  Consistency,
};

// Stable machine-readable name, used by the CLI's error line.
constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "PARSE";
    case ErrorCode::DuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::Config: return "CONFIG";
    case ErrorCode::Format: return "FORMAT";
    case ErrorCode::Data: return "DATA";
    case ErrorCode::Io: return "IO";
    case ErrorCode::Validation: return "VALIDATION";
    case ErrorCode::Divergence: return "DIVERGENCE";
    case ErrorCode::Shape: return "SHAPE";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::Range: return "RANGE";
    case ErrorCode::UndefinedDistance: return "UNDEFINED_DISTANCE";
    case ErrorCode::UndefinedCorrelation: return "UNDEFINED_CORRELATION";
    case ErrorCode::EmptyUsage: return "EMPTY_USAGE";
    case ErrorCode::MissingWord: return "MISSING_WORD";
    case ErrorCode::Coverage: return "COVERAGE";
    case ErrorCode::Consistency: return "CONSISTENCY";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace binderlsc
