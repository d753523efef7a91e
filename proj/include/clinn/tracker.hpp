#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clinn/corpus.hpp"
#include "clinn/match.hpp"
#include "clinn/report.hpp"
#include "clinn/rule_dsl.hpp"

namespace clinn {

// Base evolves the state with rules only; Hybrid substitutes rule effects
// into an external tracker's per-turn predictions.
enum class Engine { kBase, kHybrid };
// Tracked feeds each turn's output to the next turn; Oracle feeds the gold
// annotations instead.
enum class ContextSource { kTracked, kOracle };

struct TrackerConfig {
  Engine engine = Engine::kBase;
  ApplyMode apply_mode = ApplyMode::kFull;
  MatchMode match_mode = MatchMode::kSubset;
  ContextSource context_source = ContextSource::kTracked;
};

std::string Describe(const TrackerConfig& config);

enum class BeliefSource { kRule, kExternal, kCarry };
enum class ActionSource { kRule, kExternal, kEmpty };

const char* ToString(BeliefSource source);
const char* ToString(ActionSource source);

struct TurnOutcome {
  std::string dialogue_id;
  int turn = 0;
  BeliefState belief;
  std::vector<ActItem> action;
  BeliefSource belief_source = BeliefSource::kCarry;
  ActionSource action_source = ActionSource::kEmpty;
  std::vector<std::string> fired_rule_ids;
  std::int64_t db_count = 0;

  friend bool operator==(const TurnOutcome&, const TurnOutcome&) = default;
};

// (B_{t-1}, A_{t-1}) entering a turn.
struct PriorState {
  BeliefState belief;
  std::vector<ActItem> action;
};

// Per-rule verdicts recorded by Step for the trace command.
struct StepTrace {
  MatchContext belief_context;
  MatchContext action_context;
  std::vector<std::pair<std::string, bool>> belief_rules;
  std::vector<std::pair<std::string, bool>> action_rules;
  std::optional<FireResult> belief_fired;
  std::optional<FireResult> action_fired;
};

// Shared read-only inputs of a replay.
struct TrackerInputs {
  const RuleSet& rules;
  const RestaurantDb& db;
  const Ontology& ontology;
  const PredictionMap* predictions = nullptr;
};

// One turn: belief phase, db count, action phase. Throws
// Error(kMissingPrediction) in Hybrid mode without a prediction.
TurnOutcome Step(const PriorState& prior, const std::string& dialogue_id,
                 const DialogueTurn& turn, const TrackerInputs& inputs,
                 const TrackerConfig& config, StepTrace* trace = nullptr);

// Rules are used as given; callers running Free mode pass a rule set that
// went through FilterForMode.
std::vector<TurnOutcome> ReplayDialogue(const Dialogue& dialogue, const TrackerInputs& inputs,
                                        const TrackerConfig& config);

struct RunOptions {
  std::string label;
  std::optional<std::string> seed_label;
  unsigned jobs = 1;
};

// Replays every dialogue (sorted by id; parallel over `jobs` workers) and
// scores the outcomes against gold. Applies FilterForMode itself. Throws
// Error(kCorpusEmpty) for an empty corpus.
EvalReport RunCorpus(const Corpus& corpus, const TrackerInputs& inputs,
                     const TrackerConfig& config, const RunOptions& options = {});

}  // namespace clinn
