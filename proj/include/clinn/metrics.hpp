#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "clinn/rule_dsl.hpp"
#include "clinn/semilogic.hpp"

namespace clinn {

// Prediction and gold for one turn.
struct TurnPair {
  const BeliefState* pred_belief;
  const BeliefState* gold_belief;
  const std::vector<ActItem>* pred_action;
  const std::vector<ActItem>* gold_action;
};

struct F1Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  F1Counts& operator+=(const F1Counts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    return *this;
  }
  // 1.0 when there was nothing to predict and nothing was predicted.
  double F1() const;
};

// Number of ontology slots on which pred and gold agree, with an absent slot
// read as the value "none" on either side.
std::size_t CorrectSlots(const BeliefState& pred, const BeliefState& gold,
                         std::span<const std::string> slots);

double SlotAccuracy(const BeliefState& pred, const BeliefState& gold,
                    std::span<const std::string> slots);

F1Counts SlotCounts(const BeliefState& pred, const BeliefState& gold);
F1Counts ActionCounts(const std::vector<ActItem>& pred, const std::vector<ActItem>& gold);

// Corpus-level metrics over a turn stream. All throw Error(kNoTurns) on an
// empty stream.
double JointGoal(std::span<const TurnPair> turns, std::span<const std::string> slots);
double MeanSlotAccuracy(std::span<const TurnPair> turns, std::span<const std::string> slots);
double SlotF1(std::span<const TurnPair> turns);
double ActionF1(std::span<const TurnPair> turns);

// Jaccard overlap of two rule lists under CanonicalizeRule; 1.0 for two
// empty lists.
double Agreement(std::span<const TransitionRule> a, std::span<const TransitionRule> b);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample standard deviation (n-1); 0.0 for a single value.
MeanStd Aggregate(std::span<const double> values);

struct SignTestResult {
  int wins = 0;
  int losses = 0;
  int ties = 0;
  double p_value = 1.0;
  // p_value == p_numerator / 2^m with m = wins + losses, when m <= 62.
  std::uint64_t p_numerator = 1;
  int m = 0;
  std::set<int> significant_at;
};

// One-sided sign test that `a` beats `b`; ties are dropped. Throws
// Error(kNoPairs) on an empty list.
SignTestResult SignTest(std::span<const std::pair<double, double>> pairs);

// "†", "◇", "★" for significance at 90, 95 and 99.
std::string SignificanceMarkers(const SignTestResult& result);

}  // namespace clinn
