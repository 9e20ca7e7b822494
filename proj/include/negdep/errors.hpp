#pragma once

#include <stdexcept>
#include <string>

namespace negdep {

enum class ErrorCode {
  NegativeProb,
  MassNotOne,
  DimMismatch,
  IndexOutOfRange,
  BadProbabilityVector,
  GridTooLarge,
  EnumerationTooLarge,
  LpFailure,
  NumericBreakdown,
  NotJointMix,
  NotExchangeable,
  InconsistentComponents,
  PreconditionFailed,
  DegenerateInput,
  WrongFamily,
  NotPsd,
  BadSubset,
  BadCost,
  SizeCap,
  NotSymmetricUncertainty,
  ParseError,
  Usage,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeProb: return "NegativeProb";
    case ErrorCode::MassNotOne: return "MassNotOne";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::BadProbabilityVector: return "BadProbabilityVector";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::LpFailure: return "LpFailure";
    case ErrorCode::NumericBreakdown: return "NumericBreakdown";
    case ErrorCode::NotJointMix: return "NotJointMix";
    case ErrorCode::NotExchangeable: return "NotExchangeable";
    case ErrorCode::InconsistentComponents: return "InconsistentComponents";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::BadSubset: return "BadSubset";
    case ErrorCode::BadCost: return "BadCost";
    case ErrorCode::SizeCap: return "SizeCap";
    case ErrorCode::NotSymmetricUncertainty: return "NotSymmetricUncertainty";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace negdep
