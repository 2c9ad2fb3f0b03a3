#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpop {

enum class ErrorKind {
  NonHermitian,
  DimensionMismatch,
  NoContainingClique,
  NotApplicable,
  OrderTooLow,
  UnindexedMoment,
  NumericalFailure,
  IterationLimit,
  InsufficientOrder,
  CommutationFailure,
  StitchFailure,
  IdentityResidualTooLarge,
  DegenerateClique,
  NoProgress,
  MaxItersExceeded,
  ParseError,
  MissingSection,
  DisconnectedNetwork,
};

std::string_view to_string(ErrorKind kind);

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
    case ErrorKind::NonHermitian: return "NonHermitian";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoContainingClique: return "NoContainingClique";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::OrderTooLow: return "OrderTooLow";
    case ErrorKind::UnindexedMoment: return "UnindexedMoment";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::IterationLimit: return "IterationLimit";
    case ErrorKind::InsufficientOrder: return "InsufficientOrder";
    case ErrorKind::CommutationFailure: return "CommutationFailure";
    case ErrorKind::StitchFailure: return "StitchFailure";
    case ErrorKind::IdentityResidualTooLarge: return "IdentityResidualTooLarge";
    case ErrorKind::DegenerateClique: return "DegenerateClique";
    case ErrorKind::NoProgress: return "NoProgress";
    case ErrorKind::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingSection: return "MissingSection";
    case ErrorKind::DisconnectedNetwork: return "DisconnectedNetwork";
  }
  return "Unknown";
}

}  // namespace cpop
