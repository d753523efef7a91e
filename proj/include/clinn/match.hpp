#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clinn/ontology.hpp"
#include "clinn/rule_dsl.hpp"
#include "clinn/semilogic.hpp"

namespace clinn {

// Full checks every section. Free drops prev_action for belief rules and
// belief for action rules.
enum class ApplyMode { kFull, kFree };

// Subset lets a state section hold items no pattern claims; ExactSet
// requires a bijection between patterns and items.
enum class MatchMode { kSubset, kExactSet };

const char* ToString(ApplyMode mode);
const char* ToString(MatchMode mode);

// One turn's matchable state. `belief` is B_{t-1} for belief rules and B_t
// for action rules.
struct MatchContext {
  std::vector<ActItem> user;
  BeliefState belief;
  std::vector<ActItem> prev_action;
  std::optional<std::int64_t> db_count;
};

struct FireResult {
  std::string rule_id;
  Substitution substitution;
  std::vector<FactItem> belief_effect;
  std::vector<ActItem> action_effect;

  friend bool operator==(const FireResult&, const FireResult&) = default;
};

struct RestaurantDb {
  std::vector<std::string> slots;
  std::vector<std::map<std::string, Value>> entities;
};

RestaurantDb ParseDb(std::string_view json_text, const Ontology& ontology);
RestaurantDb LoadDb(const std::filesystem::path& path, const Ontology& ontology);

// First substitution, extending `seed`, under which every pattern equals a
// distinct item. Patterns are tried in declaration order against items in
// canonical order, with backtracking.
std::optional<Substitution> MatchSection(std::span<const ActPattern> patterns,
                                         std::span<const ActItem> items, MatchMode mode,
                                         const Substitution& seed = {});
std::optional<Substitution> MatchSection(std::span<const FactPattern> patterns,
                                         std::span<const FactItem> items, MatchMode mode,
                                         const Substitution& seed = {});

// Throws Error(kUnboundEffectVariable) if the effect cannot be grounded,
// which only happens for rules that FilterForMode would have dropped.
std::optional<FireResult> RuleFires(const TransitionRule& rule, const MatchContext& ctx,
                                    ApplyMode apply_mode, MatchMode match_mode);

// Result of the lowest order_index rule that fires.
std::optional<FireResult> SelectRule(std::span<const TransitionRule> rules,
                                     const MatchContext& ctx, ApplyMode apply_mode,
                                     MatchMode match_mode);

std::int64_t DbCount(const RestaurantDb& db, const BeliefState& belief);
bool DbPredEval(const DbPredicate& pred, std::int64_t count);

// True when every effect variable is still bound by a section that stays
// active under `mode`.
bool RetainedUnder(const TransitionRule& rule, ApplyMode mode);

// Drops rules that cannot be grounded under `mode`, adding one warning per
// dropped rule.
RuleSet FilterForMode(const RuleSet& rules, ApplyMode mode);

}  // namespace clinn
