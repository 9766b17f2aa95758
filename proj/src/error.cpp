#include "topouq/error.hpp"

namespace topouq {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingNodeRaw: return "MissingNodeRaw";
    case ErrorKind::kMissingNodeResult: return "MissingNodeResult";
    case ErrorKind::kUnresolvedId: return "UnresolvedId";
    case ErrorKind::kMalformedTriple: return "MalformedTriple";
    case ErrorKind::kSchemaViolation: return "SchemaViolation";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::kProviderMismatch: return "ProviderMismatch";
    case ErrorKind::kUnknownId: return "UnknownId";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kTooFewGenerations: return "TooFewGenerations";
    case ErrorKind::kClientFailure: return "ClientFailure";
    case ErrorKind::kTimeout: return "Timeout";
    case ErrorKind::kMissingApiKey: return "MissingApiKey";
    case ErrorKind::kUnparseableResponse: return "UnparseableResponse";
    case ErrorKind::kElicitationFailed: return "ElicitationFailed";
    case ErrorKind::kNoNumberFound: return "NoNumberFound";
    case ErrorKind::kScorerFailure: return "ScorerFailure";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

bool IsProviderError(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kProviderUnavailable:
    case ErrorKind::kClientFailure:
    case ErrorKind::kTimeout:
    case ErrorKind::kMissingApiKey:
    case ErrorKind::kScorerFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace topouq
