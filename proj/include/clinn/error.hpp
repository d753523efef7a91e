#pragma once

#include <stdexcept>
#include <string>

namespace clinn {

enum class ErrorKind {
  kInvalidValue,
  kUnboundVariable,
  kUnknownSlot,
  kUnknownAct,
  kSyntax,
  kRangeRestriction,
  kDuplicateRuleId,
  kSchema,
  kDuplicateDialogueId,
  kDuplicatePrediction,
  kSampleTooLarge,
  kMissingPrediction,
  kUnboundEffectVariable,
  kCorpusEmpty,
  kNoTurns,
  kNoPairs,
  kEmptyOntology,
  kFileNotFound,
};

const char* ErrorKindName(ErrorKind kind);

// Single exception type for the library; `kind()` lets callers branch on the
// failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace clinn
