#pragma once

#include <stdexcept>
#include <string>

namespace metadistill {

enum class ErrorCode {
  // simplex-core
  ZeroEntry,
  NonFinite,
  LengthTooSmall,
  DimensionMismatch,
  ContextWeightMismatch,
  LambdaOutOfRange,
  // meta-operators
  AlphaOutOfRange,
  EmptyInputs,
  InvalidRate,
  InvalidWindow,
  InvalidSchedule,
  // recursion-engine
  CalibrationFailed,
  InvalidNoiseParam,
  // diagnostics
  TraceTooShort,
  DegenerateBaseline,
  TooFewTeachers,
  InvalidPerturbation,
  // cli-io
  ParseError,
  ValidationError,
  UnanchoredWithoutFlag,
  IoError,
  NoTraces,
};

const char* error_code_name(ErrorCode code);

/// True for errors caused by bad inputs/configuration (CLI exit code 2);
/// false for runtime failures such as calibration or I/O (exit code 3).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }

  /// Message without the code-name prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace metadistill
