#include "manner/error.hpp"

namespace manner {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::Blocked: return "Blocked";
    case ErrorKind::IllegalInteraction: return "IllegalInteraction";
    case ErrorKind::AlloSymbolPresent: return "AlloSymbolPresent";
    case ErrorKind::NoReferent: return "NoReferent";
    case ErrorKind::AmbiguousReferent: return "AmbiguousReferent";
    case ErrorKind::ExhaustedRetries: return "ExhaustedRetries";
    case ErrorKind::DepthExceeded: return "DepthExceeded";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DuplicateLhs: return "DuplicateLhs";
    case ErrorKind::InvalidProgram: return "InvalidProgram";
    case ErrorKind::Unclassifiable: return "Unclassifiable";
    case ErrorKind::RejectBudgetExceeded: return "RejectBudgetExceeded";
    case ErrorKind::UnknownAdverb: return "UnknownAdverb";
    case ErrorKind::RetryExhausted: return "RetryExhausted";
    case ErrorKind::InsufficientExamples: return "InsufficientExamples";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::DigestMismatch: return "DigestMismatch";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::MissingPrediction: return "MissingPrediction";
    case ErrorKind::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorKind::UnknownIndex: return "UnknownIndex";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace manner
