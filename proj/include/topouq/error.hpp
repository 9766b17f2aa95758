#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topouq {

// Every failure surfaced by the library carries one of these kinds. The CLI
// maps them onto exit codes (see ExitCodeFor).
enum class ErrorKind {
  // topology
  kMissingNodeRaw,
  kMissingNodeResult,
  kUnresolvedId,
  kMalformedTriple,
  kSchemaViolation,
  // embedding / distances
  kDimensionMismatch,
  kProviderUnavailable,
  kProviderMismatch,
  kUnknownId,
  kShapeMismatch,
  kInfeasible,
  kTooFewGenerations,
  // chat / elicitation / faithfulness
  kClientFailure,
  kTimeout,
  kMissingApiKey,
  kUnparseableResponse,
  kElicitationFailed,
  kNoNumberFound,
  kScorerFailure,
  // stats
  kDegenerateInput,
  kInsufficientData,
  // generic
  kInvalidArgument,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

// True for errors caused by a remote service (exit code 3 in the CLI).
bool IsProviderError(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace topouq
