#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clinn/ontology.hpp"

namespace clinn {

// A normalized slot value: lowercased, trimmed, never empty.
class Value {
 public:
  // Throws Error(kInvalidValue) if the text is empty after trimming.
  static Value Parse(std::string_view text);

  const std::string& text() const { return text_; }

  friend auto operator<=>(const Value&, const Value&) = default;

 private:
  explicit Value(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

struct FactItem {
  std::string slot;
  Value value;

  friend auto operator<=>(const FactItem&, const FactItem&) = default;
};

// act, act(slot) or act(slot(value)).
struct ActItem {
  std::string act;
  std::optional<std::string> slot;
  std::optional<Value> value;

  friend auto operator<=>(const ActItem&, const ActItem&) = default;
};

using BeliefState = std::map<std::string, Value>;
using Substitution = std::map<std::string, Value>;

struct Variable {
  std::string name;

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

using Term = std::variant<Value, Variable>;

struct FactPattern {
  std::string slot;
  Term value;
};

struct ActPattern {
  std::string act;
  std::optional<std::string> slot;
  std::optional<Term> value;
};

struct DbPredicate {
  enum class Kind { kBetween, kEq, kAny };

  Kind kind = Kind::kAny;
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  static DbPredicate Between(std::int64_t lo, std::int64_t hi);
  static DbPredicate Eq(std::int64_t n);
  static DbPredicate Any() { return {}; }

  friend bool operator==(const DbPredicate&, const DbPredicate&) = default;
};

enum class RuleKind { kBelief, kAction };

// A transition rule. An absent section (nullopt) is unconstrained; a present
// but empty section requires the matching state section to be empty.
struct TransitionRule {
  std::string id;
  RuleKind kind = RuleKind::kBelief;
  std::optional<std::vector<ActPattern>> pre_user;
  std::optional<std::vector<FactPattern>> pre_belief;
  std::optional<std::vector<ActPattern>> pre_prev_action;
  std::optional<DbPredicate> pre_db;
  std::vector<FactPattern> effect_belief;
  std::vector<ActPattern> effect_action;
  std::size_t order_index = 0;
  int source_line = 0;
};

bool IsValidVariableName(std::string_view name);

// Textual forms shared by the rule language, canonical ordering and traces.
std::string FormatValue(const Value& value);
std::string ToString(const Term& term);
std::string ToString(const FactItem& item);
std::string ToString(const ActItem& item);
std::string ToString(const FactPattern& pattern);
std::string ToString(const ActPattern& pattern);
std::string ToString(const DbPredicate& pred);
std::string ToString(const BeliefState& belief);
std::string FormatSubstitution(const Substitution& subst);
const char* ToString(RuleKind kind);

// Total order on items by their textual form; used wherever a set of
// items has to be enumerated deterministically.
bool CanonicalLess(const ActItem& a, const ActItem& b);
bool CanonicalLess(const FactItem& a, const FactItem& b);
std::vector<ActItem> CanonicalSorted(std::vector<ActItem> items);
std::vector<FactItem> BeliefFacts(const BeliefState& belief);

// Throws Error(kUnboundVariable) when a variable in the pattern is unbound.
FactItem Substitute(const FactPattern& pattern, const Substitution& subst);
ActItem Substitute(const ActPattern& pattern, const Substitution& subst);

// Later facts win per slot. Throws Error(kUnknownSlot) for slots outside
// the ontology.
BeliefState BeliefApply(const BeliefState& belief, std::span<const FactItem> facts,
                        const Ontology& ontology);

// Variables in first-occurrence order over the given patterns.
void CollectVariables(const FactPattern& pattern, std::vector<std::string>& out);
void CollectVariables(const ActPattern& pattern, std::vector<std::string>& out);

// Alpha- and order-invariant key for a rule; id and order_index excluded.
std::string CanonicalizeRule(const TransitionRule& rule);

}  // namespace clinn
