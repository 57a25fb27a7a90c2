#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qinst {

enum class ErrorKind {
  DimMismatch,
  NotHermitian,
  NotPSD,
  SingularNormalizer,
  LabelMismatch,
  NonCommuting,
  ZeroProbability,
  BadFactorization,
  BadWeights,
  BadStochasticMatrix,
  InstrumentDoesNotMeasureA,
  StateMismatch,
  UncertifiedJoint,
  InvariantViolation,
  ParseError,
  ReferenceError,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as this exception; the kind is
// what callers switch on, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::SingularNormalizer: return "SingularNormalizer";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::ZeroProbability: return "ZeroProbability";
    case ErrorKind::BadFactorization: return "BadFactorization";
    case ErrorKind::BadWeights: return "BadWeights";
    case ErrorKind::BadStochasticMatrix: return "BadStochasticMatrix";
    case ErrorKind::InstrumentDoesNotMeasureA: return "InstrumentDoesNotMeasureA";
    case ErrorKind::StateMismatch: return "StateMismatch";
    case ErrorKind::UncertifiedJoint: return "UncertifiedJoint";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ReferenceError: return "ReferenceError";
  }
  return "Unknown";
}

}  // namespace qinst
