#pragma once

#include <stdexcept>
#include <string>

namespace hsv {

enum class ErrorCode {
  // store
  UndeclaredVariable,
  CoordOutOfRange,
  KindMismatch,
  NotIndependent,
  NotPartOf,
  // expr / eval
  KindError,
  DivisionByZero,
  LnNonPositive,
  SqrtNegative,
  UnboundLogicalVar,
  Inexact,
  QuantifiedEval,
  // deriv
  NotDifferentiable,
  // program / simulation
  StepSizeTooLarge,
  // vcg
  MissingFlow,
  MissingLoopInvariant,
  FrameViolation,
  UnrestViolation,
  // tactics
  NotAnODE,
  UnsupportedRelation,
  GhostNotFresh,
  GhostInGuardOrField,
  DerivativeMismatch,
  NotIdentityAtZero,
  LipschitzSampleFailure,
  AllConstantsFailed,
  // arith
  UnsupportedConstruct,
  // model files
  SyntaxError,
  DuplicateName,
  UnknownName,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorCode::CoordOutOfRange: return "CoordOutOfRange";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::NotIndependent: return "NotIndependent";
    case ErrorCode::NotPartOf: return "NotPartOf";
    case ErrorCode::KindError: return "KindError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::LnNonPositive: return "LnNonPositive";
    case ErrorCode::SqrtNegative: return "SqrtNegative";
    case ErrorCode::UnboundLogicalVar: return "UnboundLogicalVar";
    case ErrorCode::Inexact: return "Inexact";
    case ErrorCode::QuantifiedEval: return "QuantifiedEval";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorCode::MissingFlow: return "MissingFlow";
    case ErrorCode::MissingLoopInvariant: return "MissingLoopInvariant";
    case ErrorCode::FrameViolation: return "FrameViolation";
    case ErrorCode::UnrestViolation: return "UnrestViolation";
    case ErrorCode::NotAnODE: return "NotAnODE";
    case ErrorCode::UnsupportedRelation: return "UnsupportedRelation";
    case ErrorCode::GhostNotFresh: return "GhostNotFresh";
    case ErrorCode::GhostInGuardOrField: return "GhostInGuardOrField";
    case ErrorCode::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorCode::NotIdentityAtZero: return "NotIdentityAtZero";
    case ErrorCode::LipschitzSampleFailure: return "LipschitzSampleFailure";
    case ErrorCode::AllConstantsFailed: return "AllConstantsFailed";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownName: return "UnknownName";
  }
  return "Unknown";
}

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for errors raised while evaluating an expression at a store.
  bool is_eval_error() const noexcept {
    switch (code_) {
      case ErrorCode::DivisionByZero:
      case ErrorCode::LnNonPositive:
      case ErrorCode::SqrtNegative:
      case ErrorCode::UnboundLogicalVar:
      case ErrorCode::Inexact:
      case ErrorCode::QuantifiedEval:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hsv
