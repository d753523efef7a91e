#include "clinn/tracker.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "clinn/error.hpp"
#include "clinn/metrics.hpp"

namespace clinn {
namespace {

std::vector<std::pair<std::string, bool>> TryAll(const std::vector<TransitionRule>& rules,
                                                  const MatchContext& ctx,
                                                  const TrackerConfig& config) {
  std::vector<std::pair<std::string, bool>> out;
  for (const auto& rule : rules) {
    out.emplace_back(rule.id,
                     RuleFires(rule, ctx, config.apply_mode, config.match_mode).has_value());
  }
  return out;
}

}  // namespace

std::string Describe(const TrackerConfig& config) {
  return fmt::format("{}-{}-{}-{}", config.engine == Engine::kBase ? "base" : "hybrid",
                     ToString(config.apply_mode), ToString(config.match_mode),
                     config.context_source == ContextSource::kTracked ? "tracked" : "oracle");
}

const char* ToString(BeliefSource source) {
  switch (source) {
    case BeliefSource::kRule: return "rule";
    case BeliefSource::kExternal: return "external";
    case BeliefSource::kCarry: return "carry";
  }
  return "carry";
}

const char* ToString(ActionSource source) {
  switch (source) {
    case ActionSource::kRule: return "rule";
    case ActionSource::kExternal: return "external";
    case ActionSource::kEmpty: return "empty";
  }
  return "empty";
}

TurnOutcome Step(const PriorState& prior, const std::string& dialogue_id,
                 const DialogueTurn& turn, const TrackerInputs& inputs,
                 const TrackerConfig& config, StepTrace* trace) {
  const PredictionRecord* prediction = nullptr;
  if (config.engine == Engine::kHybrid) {
    if (inputs.predictions != nullptr) {
      auto it = inputs.predictions->find({dialogue_id, turn.index});
      if (it != inputs.predictions->end()) prediction = &it->second;
    }
    if (prediction == nullptr) {
      throw Error(ErrorKind::kMissingPrediction,
                  fmt::format("no prediction for ({}, {})", dialogue_id, turn.index));
    }
  }

  TurnOutcome out;
  out.dialogue_id = dialogue_id;
  out.turn = turn.index;

  // Belief phase: U_t, B_{t-1}, A_{t-1}; db count of B_{t-1}.
  MatchContext belief_ctx{turn.user_acts, prior.belief, prior.action,
                          DbCount(inputs.db, prior.belief)};
  auto belief_fired = SelectRule(inputs.rules.belief_rules, belief_ctx, config.apply_mode,
                                 config.match_mode);
  if (belief_fired) {
    out.belief = BeliefApply(prior.belief, belief_fired->belief_effect, inputs.ontology);
    out.belief_source = BeliefSource::kRule;
    out.fired_rule_ids.push_back(belief_fired->rule_id);
  } else if (prediction != nullptr) {
    out.belief = prediction->belief;
    out.belief_source = BeliefSource::kExternal;
  } else {
    out.belief = prior.belief;
    out.belief_source = BeliefSource::kCarry;
  }

  out.db_count = DbCount(inputs.db, out.belief);

  // Action phase: U_t, B_t, A_{t-1}, DB_t.
  MatchContext action_ctx{turn.user_acts, out.belief, prior.action, out.db_count};
  auto action_fired = SelectRule(inputs.rules.action_rules, action_ctx, config.apply_mode,
                                 config.match_mode);
  if (action_fired) {
    out.action = CanonicalSorted(action_fired->action_effect);
    out.action_source = ActionSource::kRule;
    out.fired_rule_ids.push_back(action_fired->rule_id);
  } else if (prediction != nullptr) {
    out.action = CanonicalSorted(prediction->action);
    out.action_source = ActionSource::kExternal;
  } else {
    out.action_source = ActionSource::kEmpty;
  }

  if (trace != nullptr) {
    trace->belief_rules = TryAll(inputs.rules.belief_rules, belief_ctx, config);
    trace->action_rules = TryAll(inputs.rules.action_rules, action_ctx, config);
    trace->belief_context = std::move(belief_ctx);
    trace->action_context = std::move(action_ctx);
    trace->belief_fired = std::move(belief_fired);
    trace->action_fired = std::move(action_fired);
  }
  return out;
}

std::vector<TurnOutcome> ReplayDialogue(const Dialogue& dialogue, const TrackerInputs& inputs,
                                        const TrackerConfig& config) {
  std::vector<TurnOutcome> outcomes;
  PriorState prior;
  for (const auto& turn : dialogue.turns) {
    TurnOutcome outcome = Step(prior, dialogue.id, turn, inputs, config);
    if (config.context_source == ContextSource::kOracle) {
      prior = {turn.gold_belief, turn.gold_action};
    } else {
      prior = {outcome.belief, outcome.action};
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

EvalReport RunCorpus(const Corpus& corpus, const TrackerInputs& inputs,
                     const TrackerConfig& config, const RunOptions& options) {
  if (corpus.dialogues.empty()) throw Error(ErrorKind::kCorpusEmpty, "corpus has no dialogues");

  const RuleSet rules = FilterForMode(inputs.rules, config.apply_mode);
  const TrackerInputs filtered{rules, inputs.db, inputs.ontology, inputs.predictions};

  std::vector<const Dialogue*> order;
  for (const auto& d : corpus.dialogues) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });

  // Each worker writes only its own slots; the first failure by dialogue
  // order is rethrown so errors do not depend on scheduling.
  std::vector<std::vector<TurnOutcome>> outcomes(order.size());
  std::vector<std::exception_ptr> errors(order.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < order.size(); i = next++) {
      try {
        outcomes[i] = ReplayDialogue(*order[i], filtered, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs,
                                                        static_cast<unsigned>(order.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  EvalReport report;
  report.label = options.label.empty() ? Describe(config) : options.label;
  report.seed_label = options.seed_label;
  report.dialogue_count = order.size();
  report.slot_count = inputs.ontology.slots.size();
  std::vector<TurnPair> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Dialogue& dialogue = *order[i];
    for (std::size_t t = 0; t < dialogue.turns.size(); ++t) {
      const DialogueTurn& gold = dialogue.turns[t];
      const TurnOutcome& out = outcomes[i][t];
      pairs.push_back({&out.belief, &gold.gold_belief, &out.action, &gold.gold_action});
      const std::size_t correct =
          CorrectSlots(out.belief, gold.gold_belief, inputs.ontology.slots);
      report.turns.push_back({dialogue.id, out.turn, ToString(out.belief_source),
                              ToString(out.action_source), out.fired_rule_ids,
                              correct == inputs.ontology.slots.size(), correct});
    }
  }
  report.turn_count = pairs.size();
  report.joint_goal = JointGoal(pairs, inputs.ontology.slots);
  report.slot_accuracy = MeanSlotAccuracy(pairs, inputs.ontology.slots);
  report.slot_f1 = SlotF1(pairs);
  report.action_f1 = ActionF1(pairs);
  return report;
}

}  // namespace clinn
