#include "metadistill/errors.hpp"

namespace metadistill {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroEntry: return "ZeroEntry";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LengthTooSmall: return "LengthTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ContextWeightMismatch: return "ContextWeightMismatch";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::EmptyInputs: return "EmptyInputs";
    case ErrorCode::InvalidRate: return "InvalidRate";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::CalibrationFailed: return "CalibrationFailed";
    case ErrorCode::InvalidNoiseParam: return "InvalidNoiseParam";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::DegenerateBaseline: return "DegenerateBaseline";
    case ErrorCode::TooFewTeachers: return "TooFewTeachers";
    case ErrorCode::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnanchoredWithoutFlag: return "UnanchoredWithoutFlag";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoTraces: return "NoTraces";
  }
  return "Error";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::CalibrationFailed:
    case ErrorCode::IoError:
      return false;
    default:
      return true;
  }
}

}  // namespace metadistill
