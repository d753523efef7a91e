#include "clinn/semilogic.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include <fmt/format.h>

#include "clinn/error.hpp"

namespace clinn {
namespace {

bool IsBarewordChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.' ||
         c == '-';
}

template <typename Map>
std::string NameFor(const Map& renaming, const std::string& name) {
  auto it = renaming.find(name);
  return it == renaming.end() ? name : it->second;
}

// Renders a term, optionally masking variables (for renaming-independent
// ordering) or replacing their names through `renaming`.
using Renaming = std::unordered_map<std::string, std::string>;

std::string RenderTerm(const Term& term, const Renaming* renaming, bool mask) {
  if (const auto* value = std::get_if<Value>(&term)) return FormatValue(*value);
  const auto& var = std::get<Variable>(term);
  if (mask) return "?";
  return "?" + (renaming ? NameFor(*renaming, var.name) : var.name);
}

std::string Render(const FactPattern& p, const Renaming* renaming, bool mask) {
  return p.slot + "(" + RenderTerm(p.value, renaming, mask) + ")";
}

std::string Render(const ActPattern& p, const Renaming* renaming, bool mask) {
  std::string out = p.act + "(";
  if (p.slot) {
    out += *p.slot;
    if (p.value) out += "(" + RenderTerm(*p.value, renaming, mask) + ")";
  }
  out += ")";
  return out;
}

template <typename Pattern>
std::vector<const Pattern*> MaskSorted(const std::vector<Pattern>& patterns) {
  std::vector<const Pattern*> order;
  for (const auto& p : patterns) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const Pattern* a, const Pattern* b) {
    return Render(*a, nullptr, true) < Render(*b, nullptr, true);
  });
  return order;
}

template <typename Pattern>
void AssignNames(const std::vector<Pattern>& patterns, Renaming& renaming) {
  for (const Pattern* p : MaskSorted(patterns)) {
    std::vector<std::string> vars;
    CollectVariables(*p, vars);
    for (const auto& v : vars) {
      if (!renaming.contains(v)) renaming.emplace(v, fmt::format("V{}", renaming.size() + 1));
    }
  }
}

template <typename Pattern>
std::string RenderSection(const char* name, const std::optional<std::vector<Pattern>>& section,
                          const Renaming& renaming) {
  if (!section) return std::string(name) + ":-";
  std::vector<std::string> items;
  for (const auto& p : *section) items.push_back(Render(p, &renaming, false));
  std::sort(items.begin(), items.end());
  return fmt::format("{}{{{}}}", name, fmt::join(items, ","));
}

}  // namespace

Value Value::Parse(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    throw Error(ErrorKind::kInvalidValue, "value must not be empty");
  }
  auto end = text.find_last_not_of(" \t\r\n");
  std::string normalized(text.substr(begin, end - begin + 1));
  std::transform(normalized.begin(), normalized.end(), normalized.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return Value(std::move(normalized));
}

DbPredicate DbPredicate::Between(std::int64_t lo, std::int64_t hi) {
  if (lo > hi || lo < 0) {
    throw Error(ErrorKind::kInvalidValue, fmt::format("invalid between({},{})", lo, hi));
  }
  return {Kind::kBetween, lo, hi};
}

DbPredicate DbPredicate::Eq(std::int64_t n) {
  if (n < 0) throw Error(ErrorKind::kInvalidValue, fmt::format("invalid eq({})", n));
  return {Kind::kEq, n, n};
}

bool IsValidVariableName(std::string_view name) {
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::string FormatValue(const Value& value) {
  const std::string& text = value.text();
  if (std::all_of(text.begin(), text.end(), IsBarewordChar)) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string ToString(const Term& term) { return RenderTerm(term, nullptr, false); }

std::string ToString(const FactItem& item) {
  return item.slot + "(" + FormatValue(item.value) + ")";
}

std::string ToString(const ActItem& item) {
  std::string out = item.act + "(";
  if (item.slot) {
    out += *item.slot;
    if (item.value) out += "(" + FormatValue(*item.value) + ")";
  }
  out += ")";
  return out;
}

std::string ToString(const FactPattern& pattern) { return Render(pattern, nullptr, false); }
std::string ToString(const ActPattern& pattern) { return Render(pattern, nullptr, false); }

std::string ToString(const DbPredicate& pred) {
  switch (pred.kind) {
    case DbPredicate::Kind::kBetween: return fmt::format("between({},{})", pred.lo, pred.hi);
    case DbPredicate::Kind::kEq: return fmt::format("eq({})", pred.lo);
    case DbPredicate::Kind::kAny: return "any";
  }
  return "any";
}

std::string ToString(const BeliefState& belief) {
  std::vector<std::string> parts;
  for (const auto& [slot, value] : belief) parts.push_back(slot + "(" + FormatValue(value) + ")");
  return fmt::format("{{{}}}", fmt::join(parts, ", "));
}

std::string FormatSubstitution(const Substitution& subst) {
  std::vector<std::string> parts;
  for (const auto& [name, value] : subst) parts.push_back(name + ": " + FormatValue(value));
  return fmt::format("{{{}}}", fmt::join(parts, ", "));
}

const char* ToString(RuleKind kind) { return kind == RuleKind::kBelief ? "belief" : "action"; }

bool CanonicalLess(const ActItem& a, const ActItem& b) { return ToString(a) < ToString(b); }
bool CanonicalLess(const FactItem& a, const FactItem& b) { return ToString(a) < ToString(b); }

std::vector<ActItem> CanonicalSorted(std::vector<ActItem> items) {
  std::sort(items.begin(), items.end(),
            [](const ActItem& a, const ActItem& b) { return CanonicalLess(a, b); });
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

std::vector<FactItem> BeliefFacts(const BeliefState& belief) {
  std::vector<FactItem> facts;
  for (const auto& [slot, value] : belief) facts.push_back({slot, value});
  std::sort(facts.begin(), facts.end(),
            [](const FactItem& a, const FactItem& b) { return CanonicalLess(a, b); });
  return facts;
}

namespace {

Value Resolve(const Term& term, const Substitution& subst) {
  if (const auto* value = std::get_if<Value>(&term)) return *value;
  const auto& name = std::get<Variable>(term).name;
  auto it = subst.find(name);
  if (it == subst.end()) {
    throw Error(ErrorKind::kUnboundVariable, "unbound variable ?" + name);
  }
  return it->second;
}

}  // namespace

FactItem Substitute(const FactPattern& pattern, const Substitution& subst) {
  return {pattern.slot, Resolve(pattern.value, subst)};
}

ActItem Substitute(const ActPattern& pattern, const Substitution& subst) {
  ActItem item{pattern.act, pattern.slot, std::nullopt};
  if (pattern.value) item.value = Resolve(*pattern.value, subst);
  return item;
}

BeliefState BeliefApply(const BeliefState& belief, std::span<const FactItem> facts,
                        const Ontology& ontology) {
  BeliefState out = belief;
  for (const auto& fact : facts) {
    if (!ontology.HasSlot(fact.slot)) {
      throw Error(ErrorKind::kUnknownSlot, "unknown slot '" + fact.slot + "'");
    }
    out.insert_or_assign(fact.slot, fact.value);
  }
  return out;
}

void CollectVariables(const FactPattern& pattern, std::vector<std::string>& out) {
  if (const auto* var = std::get_if<Variable>(&pattern.value)) {
    if (std::find(out.begin(), out.end(), var->name) == out.end()) out.push_back(var->name);
  }
}

void CollectVariables(const ActPattern& pattern, std::vector<std::string>& out) {
  if (!pattern.value) return;
  if (const auto* var = std::get_if<Variable>(&*pattern.value)) {
    if (std::find(out.begin(), out.end(), var->name) == out.end()) out.push_back(var->name);
  }
}

std::string CanonicalizeRule(const TransitionRule& rule) {
  // Variables are numbered by first occurrence over items ordered with their
  // variables masked, so neither item order nor variable names leak into the
  // key. Items that differ only in variable names keep source order.
  Renaming renaming;
  if (rule.pre_user) AssignNames(*rule.pre_user, renaming);
  if (rule.pre_belief) AssignNames(*rule.pre_belief, renaming);
  if (rule.pre_prev_action) AssignNames(*rule.pre_prev_action, renaming);
  std::string effect;
  if (rule.kind == RuleKind::kBelief) {
    AssignNames(rule.effect_belief, renaming);
    effect = RenderSection("effect", std::optional(rule.effect_belief), renaming);
  } else {
    AssignNames(rule.effect_action, renaming);
    effect = RenderSection("effect", std::optional(rule.effect_action), renaming);
  }
  return fmt::format("{}|{}|{}|{}|db:{}|{}", ToString(rule.kind),
                     RenderSection("user", rule.pre_user, renaming),
                     RenderSection("belief", rule.pre_belief, renaming),
                     RenderSection("prev_action", rule.pre_prev_action, renaming),
                     rule.pre_db ? ToString(*rule.pre_db) : "-", effect);
}

}  // namespace clinn
