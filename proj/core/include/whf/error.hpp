#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace whf {

enum class ErrorCode {
  SingularMatrix,
  DegenerateEigenvalues,
  LogOfZero,
  SyntaxError,
  UndeclaredBranchPoint,
  EvalAtBranchPoint,
  DivisionByZero,
  BadPoleSet,
  LTooSmall,
  NotDiagonalized,
  AmbiguousMatch,
  PoleCollision,
  NonInvertible,
  QuadratureNotConverged,
  InvalidArgument,
  ConfigError,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit path) can tell precondition violations apart
/// from numerical breakdowns.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DegenerateEigenvalues: return "DegenerateEigenvalues";
    case ErrorCode::LogOfZero: return "LogOfZero";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UndeclaredBranchPoint: return "UndeclaredBranchPoint";
    case ErrorCode::EvalAtBranchPoint: return "EvalAtBranchPoint";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::BadPoleSet: return "BadPoleSet";
    case ErrorCode::LTooSmall: return "LTooSmall";
    case ErrorCode::NotDiagonalized: return "NotDiagonalized";
    case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorCode::PoleCollision: return "PoleCollision";
    case ErrorCode::NonInvertible: return "NonInvertible";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace whf
