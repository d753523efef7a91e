#include "clinn/error.hpp"

namespace clinn {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidValue: return "InvalidValue";
    case ErrorKind::kUnboundVariable: return "UnboundVariable";
    case ErrorKind::kUnknownSlot: return "UnknownSlot";
    case ErrorKind::kUnknownAct: return "UnknownAct";
    case ErrorKind::kSyntax: return "SyntaxError";
    case ErrorKind::kRangeRestriction: return "RangeRestriction";
    case ErrorKind::kDuplicateRuleId: return "DuplicateRuleId";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kDuplicateDialogueId: return "DuplicateDialogueId";
    case ErrorKind::kDuplicatePrediction: return "DuplicatePrediction";
    case ErrorKind::kSampleTooLarge: return "SampleTooLarge";
    case ErrorKind::kMissingPrediction: return "MissingPrediction";
    case ErrorKind::kUnboundEffectVariable: return "UnboundEffectVariable";
    case ErrorKind::kCorpusEmpty: return "CorpusEmpty";
    case ErrorKind::kNoTurns: return "NoTurns";
    case ErrorKind::kNoPairs: return "NoPairs";
    case ErrorKind::kEmptyOntology: return "EmptyOntology";
    case ErrorKind::kFileNotFound: return "FileNotFound";
  }
  return "Unknown";
}

}  // namespace clinn
