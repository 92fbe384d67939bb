#pragma once

#include <stdexcept>
#include <string>

namespace chanest {

enum class ErrorCode {
  DimensionMismatch,
  NumericalDivergence,
  ChannelEvaluationError,
  InvalidParams,
  InvalidBitDepth,
  QuantizeNaN,
  DegenerateSignal,
  ZeroReference,
  ConfigError,
  EmptyInput,
  IoError,
};

const char* to_string(ErrorCode code);

/// Library-wide exception. The code lets callers (CLI, bindings) branch on the
/// failure class without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::ChannelEvaluationError: return "ChannelEvaluationError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidBitDepth: return "InvalidBitDepth";
    case ErrorCode::QuantizeNaN: return "QuantizeNaN";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace chanest
