#include "opmeans/error.hpp"

namespace opmeans {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::BadInterval: return "BadInterval";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::SigmaIsLeftTrivial: return "SigmaIsLeftTrivial";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::AlphaZero: return "AlphaZero";
    case ErrorCode::HypothesisFails: return "HypothesisFails";
    case ErrorCode::CertificationFailure: return "CertificationFailure";
    case ErrorCode::SolverInvariant: return "SolverInvariant";
    case ErrorCode::BadH: return "BadH";
    case ErrorCode::BadR: return "BadR";
    case ErrorCode::BoundsViolated: return "BoundsViolated";
    case ErrorCode::SandwichFails: return "SandwichFails";
    case ErrorCode::BadMode: return "BadMode";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace opmeans
