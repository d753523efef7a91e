#include "clinn/match.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "clinn/error.hpp"

namespace clinn {
namespace {

// Binds or checks one term; newly bound names are appended to `trail` so
// the caller can undo them on backtrack.
bool UnifyTerm(const Term& term, const Value& value, Substitution& subst,
               std::vector<std::string>& trail) {
  if (const auto* constant = std::get_if<Value>(&term)) return *constant == value;
  const auto& name = std::get<Variable>(term).name;
  auto it = subst.find(name);
  if (it != subst.end()) return it->second == value;
  subst.emplace(name, value);
  trail.push_back(name);
  return true;
}

bool Unify(const FactPattern& p, const FactItem& item, Substitution& subst,
           std::vector<std::string>& trail) {
  return p.slot == item.slot && UnifyTerm(p.value, item.value, subst, trail);
}

bool Unify(const ActPattern& p, const ActItem& item, Substitution& subst,
           std::vector<std::string>& trail) {
  if (p.act != item.act || p.slot != item.slot) return false;
  if (p.value.has_value() != item.value.has_value()) return false;
  return !p.value || UnifyTerm(*p.value, *item.value, subst, trail);
}

using Continuation = std::function<bool(Substitution&)>;

// Depth-first search over injective pattern->item assignments. Returns true
// as soon as `cont` accepts a complete assignment.
template <typename Pattern, typename Item>
bool Search(std::span<const Pattern> patterns, const std::vector<const Item*>& items,
            std::size_t k, std::vector<bool>& used, Substitution& subst,
            const Continuation& cont) {
  if (k == patterns.size()) return cont(subst);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::string> trail;
    if (Unify(patterns[k], *items[i], subst, trail)) {
      used[i] = true;
      if (Search(patterns, items, k + 1, used, subst, cont)) return true;
      used[i] = false;
    }
    for (const auto& name : trail) subst.erase(name);
  }
  return false;
}

template <typename Pattern, typename Item>
bool SearchSection(std::span<const Pattern> patterns, const std::vector<const Item*>& items,
                   MatchMode mode, Substitution& subst, const Continuation& cont) {
  if (patterns.size() > items.size()) return false;
  if (mode == MatchMode::kExactSet && patterns.size() != items.size()) return false;
  std::vector<bool> used(items.size(), false);
  return Search(patterns, items, 0, used, subst, cont);
}

template <typename Item>
std::vector<const Item*> SortedView(std::span<const Item> items) {
  std::vector<std::pair<std::string, const Item*>> keyed;
  keyed.reserve(items.size());
  for (const auto& item : items) keyed.emplace_back(ToString(item), &item);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  std::vector<const Item*> out;
  for (const auto& [key, item] : keyed) out.push_back(item);
  return out;
}

template <typename Pattern, typename Item>
std::optional<Substitution> FirstMatch(std::span<const Pattern> patterns,
                                       std::span<const Item> items, MatchMode mode,
                                       const Substitution& seed) {
  Substitution subst = seed;
  std::optional<Substitution> found;
  SearchSection<Pattern, Item>(patterns, SortedView(items), mode, subst,
                               [&](Substitution& s) {
                                 found = s;
                                 return true;
                               });
  return found;
}

// Canonically ordered state sections, built once per SelectRule call.
struct PreparedContext {
  std::vector<const ActItem*> user;
  std::vector<FactItem> belief_facts;
  std::vector<const FactItem*> belief;
  std::vector<const ActItem*> prev_action;
  std::optional<std::int64_t> db_count;

  explicit PreparedContext(const MatchContext& ctx)
      : user(SortedView(std::span<const ActItem>(ctx.user))),
        belief_facts(BeliefFacts(ctx.belief)),
        prev_action(SortedView(std::span<const ActItem>(ctx.prev_action))),
        db_count(ctx.db_count) {
    for (const auto& fact : belief_facts) belief.push_back(&fact);
  }
};

// An explicitly empty section only matches an empty state section, in
// either match mode.
template <typename Pattern, typename Item>
bool SectionStep(const std::optional<std::vector<Pattern>>& section, bool active,
                 const std::vector<const Item*>& items, MatchMode mode, Substitution& subst,
                 const Continuation& next) {
  if (!section || !active) return next(subst);
  MatchMode effective = section->empty() ? MatchMode::kExactSet : mode;
  return SearchSection<Pattern, Item>(std::span<const Pattern>(*section), items, effective,
                                      subst, next);
}

bool SectionActive(RuleKind kind, ApplyMode mode, bool is_belief_section) {
  if (mode == ApplyMode::kFull) return true;
  // Free: belief rules ignore prev_action, action rules ignore belief.
  return kind == RuleKind::kBelief ? true : !is_belief_section;
}

bool PrevActionActive(RuleKind kind, ApplyMode mode) {
  return mode == ApplyMode::kFull || kind == RuleKind::kAction;
}

std::optional<FireResult> Fire(const TransitionRule& rule, const PreparedContext& ctx,
                               ApplyMode apply_mode, MatchMode match_mode) {
  if (rule.pre_db && !ctx.db_count) {
    throw std::invalid_argument("rule " + rule.id + " has a db precondition but no db count");
  }
  const bool belief_active = SectionActive(rule.kind, apply_mode, true);
  const bool prev_active = PrevActionActive(rule.kind, apply_mode);

  std::optional<Substitution> found;
  Continuation db_step = [&](Substitution& s) {
    if (rule.pre_db && !DbPredEval(*rule.pre_db, *ctx.db_count)) return false;
    found = s;
    return true;
  };
  Continuation prev_step = [&](Substitution& s) {
    return SectionStep(rule.pre_prev_action, prev_active, ctx.prev_action, match_mode, s,
                       db_step);
  };
  Continuation belief_step = [&](Substitution& s) {
    return SectionStep(rule.pre_belief, belief_active, ctx.belief, match_mode, s, prev_step);
  };
  Substitution subst;
  SectionStep(rule.pre_user, true, ctx.user, match_mode, subst, belief_step);
  if (!found) return std::nullopt;

  FireResult result{rule.id, *found, {}, {}};
  try {
    for (const auto& p : rule.effect_belief) result.belief_effect.push_back(Substitute(p, *found));
    for (const auto& p : rule.effect_action) result.action_effect.push_back(Substitute(p, *found));
  } catch (const Error& e) {
    throw Error(ErrorKind::kUnboundEffectVariable, "rule " + rule.id + ": " + e.what());
  }
  return result;
}

}  // namespace

const char* ToString(ApplyMode mode) { return mode == ApplyMode::kFull ? "full" : "free"; }

const char* ToString(MatchMode mode) {
  return mode == MatchMode::kSubset ? "subset" : "exactset";
}

std::optional<Substitution> MatchSection(std::span<const ActPattern> patterns,
                                         std::span<const ActItem> items, MatchMode mode,
                                         const Substitution& seed) {
  return FirstMatch(patterns, items, mode, seed);
}

std::optional<Substitution> MatchSection(std::span<const FactPattern> patterns,
                                         std::span<const FactItem> items, MatchMode mode,
                                         const Substitution& seed) {
  return FirstMatch(patterns, items, mode, seed);
}

std::optional<FireResult> RuleFires(const TransitionRule& rule, const MatchContext& ctx,
                                    ApplyMode apply_mode, MatchMode match_mode) {
  return Fire(rule, PreparedContext(ctx), apply_mode, match_mode);
}

std::optional<FireResult> SelectRule(std::span<const TransitionRule> rules,
                                     const MatchContext& ctx, ApplyMode apply_mode,
                                     MatchMode match_mode) {
  if (rules.empty()) return std::nullopt;
  const PreparedContext prepared(ctx);
  const TransitionRule* best = nullptr;
  std::optional<FireResult> best_result;
  for (const auto& rule : rules) {
    if (best && rule.order_index >= best->order_index) continue;
    if (auto result = Fire(rule, prepared, apply_mode, match_mode)) {
      best = &rule;
      best_result = std::move(result);
    }
  }
  return best_result;
}

std::int64_t DbCount(const RestaurantDb& db, const BeliefState& belief) {
  std::vector<std::pair<const std::string*, const Value*>> constraints;
  for (const auto& slot : db.slots) {
    auto it = belief.find(slot);
    if (it != belief.end()) constraints.emplace_back(&slot, &it->second);
  }
  return std::count_if(db.entities.begin(), db.entities.end(), [&](const auto& entity) {
    return std::all_of(constraints.begin(), constraints.end(), [&](const auto& c) {
      auto it = entity.find(*c.first);
      return it != entity.end() && it->second == *c.second;
    });
  });
}

bool DbPredEval(const DbPredicate& pred, std::int64_t count) {
  switch (pred.kind) {
    case DbPredicate::Kind::kBetween: return pred.lo <= count && count <= pred.hi;
    case DbPredicate::Kind::kEq: return count == pred.lo;
    case DbPredicate::Kind::kAny: return true;
  }
  return false;
}

bool RetainedUnder(const TransitionRule& rule, ApplyMode mode) {
  std::vector<std::string> bound;
  if (rule.pre_user) for (const auto& p : *rule.pre_user) CollectVariables(p, bound);
  if (rule.pre_belief && SectionActive(rule.kind, mode, true)) {
    for (const auto& p : *rule.pre_belief) CollectVariables(p, bound);
  }
  if (rule.pre_prev_action && PrevActionActive(rule.kind, mode)) {
    for (const auto& p : *rule.pre_prev_action) CollectVariables(p, bound);
  }
  std::vector<std::string> used;
  for (const auto& p : rule.effect_belief) CollectVariables(p, used);
  for (const auto& p : rule.effect_action) CollectVariables(p, used);
  return std::all_of(used.begin(), used.end(), [&](const std::string& name) {
    return std::find(bound.begin(), bound.end(), name) != bound.end();
  });
}

RuleSet FilterForMode(const RuleSet& rules, ApplyMode mode) {
  RuleSet out;
  out.source_name = rules.source_name;
  out.warnings = rules.warnings;
  auto filter = [&](const std::vector<TransitionRule>& in, std::vector<TransitionRule>& kept) {
    for (const auto& rule : in) {
      if (RetainedUnder(rule, mode)) {
        kept.push_back(rule);
        continue;
      }
      out.warnings.push_back(
          {rule.source_line, 1,
           fmt::format("rule {} dropped in {} mode: an effect variable is bound only by an "
                       "ignored section",
                       rule.id, ToString(mode)),
           ParseDiagnostic::Severity::kWarning});
    }
  };
  filter(rules.belief_rules, out.belief_rules);
  filter(rules.action_rules, out.action_rules);
  return out;
}

RestaurantDb ParseDb(std::string_view json_text, const Ontology& ontology) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("db: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::kSchema, "db: expected an array of entities");
  RestaurantDb db;
  db.slots = ontology.db_slots;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    if (!entry.is_object()) {
      throw Error(ErrorKind::kSchema, fmt::format("db[{}]: expected an object", i));
    }
    std::map<std::string, Value> entity;
    for (const auto& [key, value] : entry.items()) {
      if (std::find(db.slots.begin(), db.slots.end(), key) == db.slots.end()) {
        throw Error(ErrorKind::kUnknownSlot, fmt::format("db[{}]: '{}' is not a db slot", i, key));
      }
      if (!value.is_string()) {
        throw Error(ErrorKind::kSchema, fmt::format("db[{}].{}: expected a string", i, key));
      }
      try {
        entity.emplace(key, Value::Parse(value.get<std::string>()));
      } catch (const Error& e) {
        throw Error(ErrorKind::kSchema, fmt::format("db[{}].{}: {}", i, key, e.what()));
      }
    }
    auto name = entity.find("name");
    if (name == entity.end()) {
      throw Error(ErrorKind::kSchema, fmt::format("db[{}]: missing name", i));
    }
    if (std::find(names.begin(), names.end(), name->second.text()) != names.end()) {
      throw Error(ErrorKind::kSchema,
                  fmt::format("db[{}]: duplicate name '{}'", i, name->second.text()));
    }
    names.push_back(name->second.text());
    db.entities.push_back(std::move(entity));
  }
  return db;
}

RestaurantDb LoadDb(const std::filesystem::path& path, const Ontology& ontology) {
  return ParseDb(ReadFile(path), ontology);
}

}  // namespace clinn
