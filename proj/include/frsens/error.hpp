#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace frsens {

enum class ErrorCode {
  AllZero,
  NegativeValue,
  InvalidDensity,
  InvalidGrid,
  GridMismatch,
  BaseMismatch,
  NotTangent,
  AntipodalOrBoundary,
  EmptyInput,
  EmptyDataset,
  TruncationTooSmall,
  InvalidPhi,
  InvalidConfig,
  DegenerateSample,
  InsufficientSamples,
  InsufficientValues,
  UnknownModel,
  ParseError,
  NonPositiveForLog,
  ConfigBadParam,
  ConfigMissing,
  IoError,
};

inline constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::AllZero: return "ALL_ZERO";
    case ErrorCode::NegativeValue: return "NEGATIVE_VALUE";
    case ErrorCode::InvalidDensity: return "INVALID_DENSITY";
    case ErrorCode::InvalidGrid: return "INVALID_GRID";
    case ErrorCode::GridMismatch: return "GRID_MISMATCH";
    case ErrorCode::BaseMismatch: return "BASE_MISMATCH";
    case ErrorCode::NotTangent: return "NOT_TANGENT";
    case ErrorCode::AntipodalOrBoundary: return "ANTIPODAL_OR_BOUNDARY";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::TruncationTooSmall: return "TRUNCATION_TOO_SMALL";
    case ErrorCode::InvalidPhi: return "INVALID_PHI";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::DegenerateSample: return "DEGENERATE_SAMPLE";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
    case ErrorCode::InsufficientValues: return "INSUFFICIENT_VALUES";
    case ErrorCode::UnknownModel: return "UNKNOWN_MODEL";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::NonPositiveForLog: return "NON_POSITIVE_FOR_LOG";
    case ErrorCode::ConfigBadParam: return "CONFIG_BAD_PARAM";
    case ErrorCode::ConfigMissing: return "CONFIG_MISSING";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// True for errors caused by user input (bad files, bad configs) rather than
/// numerical failures inside a run.
inline constexpr bool is_user_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidPhi:
    case ErrorCode::UnknownModel:
    case ErrorCode::ParseError:
    case ErrorCode::NonPositiveForLog:
    case ErrorCode::ConfigBadParam:
    case ErrorCode::ConfigMissing:
    case ErrorCode::IoError:
    case ErrorCode::EmptyDataset:
    case ErrorCode::GridMismatch:
    case ErrorCode::InvalidGrid:
    case ErrorCode::InvalidDensity:
    case ErrorCode::AllZero:
    case ErrorCode::NegativeValue:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace frsens
