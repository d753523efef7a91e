#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "clinn/error.hpp"
#include "clinn/ontology.hpp"
#include "clinn/semilogic.hpp"

namespace clinn {

struct ParseDiagnostic {
  enum class Severity { kError, kWarning };

  int line = 0;
  int column = 0;
  std::string message;
  Severity severity = Severity::kError;
};

std::string ToString(const ParseDiagnostic& diag);

// Belief and action rules, each list in source order.
struct RuleSet {
  std::vector<TransitionRule> belief_rules;
  std::vector<TransitionRule> action_rules;
  std::string source_name;
  std::vector<ParseDiagnostic> warnings;

  std::size_t size() const { return belief_rules.size() + action_rules.size(); }
  const std::vector<TransitionRule>& rules(RuleKind kind) const {
    return kind == RuleKind::kBelief ? belief_rules : action_rules;
  }
};

// Thrown by ParseRules. `kind()` is one of kSyntax, kRangeRestriction,
// kUnknownAct, kUnknownSlot, kDuplicateRuleId.
class RuleParseError : public Error {
 public:
  RuleParseError(ErrorKind kind, ParseDiagnostic diag, std::string rule_id = {},
                 std::string variable = {});

  const ParseDiagnostic& diagnostic() const { return diag_; }
  const std::string& rule_id() const { return rule_id_; }
  const std::string& variable() const { return variable_; }

 private:
  ParseDiagnostic diag_;
  std::string rule_id_;
  std::string variable_;
};

RuleSet ParseRules(std::string_view text, const Ontology& ontology,
                   std::string source_name = "<input>");
RuleSet LoadRules(const std::filesystem::path& path, const Ontology& ontology);

std::string SerializeRule(const TransitionRule& rule);
// All rules, interleaved by order_index.
std::string SerializeRuleSet(const RuleSet& rules);

}  // namespace clinn
