#pragma once

#include <stdexcept>
#include <string>

namespace qpcd {

enum class ErrorCode {
  SingularMatrix,
  ConvergenceFailure,
  ParseError,
  DimensionMismatch,
  SingularBasis,
  InfeasibleVertex,
  RankDeficientAfterCut,
  NumericalBreakdown,
  InfeasibleRegion,
  BasisSelectionFailure,
  ReferenceBelowVertex,
  TuyRegionEmpty,
  SubproblemUnbounded,
  NormalizationFailure,
  FeasibilityViolation,
  DivisionByZero,
  TooLarge,
  Infeasible,
  GenerationStalled,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::InfeasibleVertex: return "InfeasibleVertex";
    case ErrorCode::RankDeficientAfterCut: return "RankDeficientAfterCut";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::InfeasibleRegion: return "InfeasibleRegion";
    case ErrorCode::BasisSelectionFailure: return "BasisSelectionFailure";
    case ErrorCode::ReferenceBelowVertex: return "ReferenceBelowVertex";
    case ErrorCode::TuyRegionEmpty: return "TuyRegionEmpty";
    case ErrorCode::SubproblemUnbounded: return "SubproblemUnbounded";
    case ErrorCode::NormalizationFailure: return "NormalizationFailure";
    case ErrorCode::FeasibilityViolation: return "FeasibilityViolation";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::GenerationStalled: return "GenerationStalled";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qpcd
