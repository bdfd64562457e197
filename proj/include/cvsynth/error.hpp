#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cvsynth {

enum class ErrorCode {
  // configuration
  MissingKey,
  UnknownVariant,
  DimensionMismatch,
  NonPositiveWeight,
  NonconformingWeight,
  GrowthViolation,
  InvalidValue,
  UnsupportedVariant,
  // evaluation
  SingularJacobian,
  NegativeAlpha,
  UnboundedSup,
  NotIntegrable,
  OutOfGrid,
  InfeasibleState,
  // solvers
  NonFiniteState,
  NoConvergence,
  NotStabilizable,
  NoFixedPoint,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the message names the
/// offending key or quantity.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  bool is_config_error() const noexcept {
    switch (code_) {
      case ErrorCode::MissingKey:
      case ErrorCode::UnknownVariant:
      case ErrorCode::DimensionMismatch:
      case ErrorCode::NonPositiveWeight:
      case ErrorCode::NonconformingWeight:
      case ErrorCode::GrowthViolation:
      case ErrorCode::InvalidValue:
      case ErrorCode::UnsupportedVariant:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnknownVariant: return "UnknownVariant";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NonconformingWeight: return "NonconformingWeight";
    case ErrorCode::GrowthViolation: return "GrowthViolation";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnsupportedVariant: return "UnsupportedVariant";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::NegativeAlpha: return "NegativeAlpha";
    case ErrorCode::UnboundedSup: return "UnboundedSup";
    case ErrorCode::NotIntegrable: return "NotIntegrable";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::InfeasibleState: return "InfeasibleState";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotStabilizable: return "NotStabilizable";
    case ErrorCode::NoFixedPoint: return "NoFixedPoint";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cvsynth
