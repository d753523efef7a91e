#include "clinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clinn/error.hpp"

namespace clinn {
namespace {

void RequireTurns(std::span<const TurnPair> turns) {
  if (turns.empty()) throw Error(ErrorKind::kNoTurns, "metric over zero turns");
}

void RequireSlots(std::span<const std::string> slots) {
  if (slots.empty()) throw Error(ErrorKind::kEmptyOntology, "slot accuracy needs slots");
}

}  // namespace

double F1Counts::F1() const {
  if (tp == 0) return (fp == 0 && fn == 0) ? 1.0 : 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

std::size_t CorrectSlots(const BeliefState& pred, const BeliefState& gold,
                         std::span<const std::string> slots) {
  std::size_t correct = 0;
  for (const auto& slot : slots) {
    auto p = pred.find(slot);
    auto g = gold.find(slot);
    const bool p_none = p == pred.end();
    const bool g_none = g == gold.end();
    if (p_none || g_none) {
      correct += (p_none && g_none) ? 1 : 0;
    } else {
      correct += (p->second == g->second) ? 1 : 0;
    }
  }
  return correct;
}

double SlotAccuracy(const BeliefState& pred, const BeliefState& gold,
                    std::span<const std::string> slots) {
  RequireSlots(slots);
  return static_cast<double>(CorrectSlots(pred, gold, slots)) /
         static_cast<double>(slots.size());
}

F1Counts SlotCounts(const BeliefState& pred, const BeliefState& gold) {
  F1Counts counts;
  for (const auto& [slot, value] : pred) {
    auto g = gold.find(slot);
    if (g != gold.end() && g->second == value) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  for (const auto& [slot, value] : gold) {
    auto p = pred.find(slot);
    if (p == pred.end() || p->second != value) ++counts.fn;
  }
  return counts;
}

F1Counts ActionCounts(const std::vector<ActItem>& pred, const std::vector<ActItem>& gold) {
  const std::vector<ActItem> p = CanonicalSorted(pred);
  const std::vector<ActItem> g = CanonicalSorted(gold);
  F1Counts counts;
  for (const auto& item : p) {
    if (std::find(g.begin(), g.end(), item) != g.end()) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  for (const auto& item : g) {
    if (std::find(p.begin(), p.end(), item) == p.end()) ++counts.fn;
  }
  return counts;
}

double JointGoal(std::span<const TurnPair> turns, std::span<const std::string> slots) {
  RequireTurns(turns);
  RequireSlots(slots);
  std::size_t exact = 0;
  for (const auto& t : turns) {
    exact += CorrectSlots(*t.pred_belief, *t.gold_belief, slots) == slots.size() ? 1 : 0;
  }
  return static_cast<double>(exact) / static_cast<double>(turns.size());
}

double MeanSlotAccuracy(std::span<const TurnPair> turns, std::span<const std::string> slots) {
  RequireTurns(turns);
  RequireSlots(slots);
  std::size_t correct = 0;
  for (const auto& t : turns) correct += CorrectSlots(*t.pred_belief, *t.gold_belief, slots);
  return static_cast<double>(correct) /
         static_cast<double>(turns.size() * slots.size());
}

double SlotF1(std::span<const TurnPair> turns) {
  RequireTurns(turns);
  F1Counts total;
  for (const auto& t : turns) total += SlotCounts(*t.pred_belief, *t.gold_belief);
  return total.F1();
}

double ActionF1(std::span<const TurnPair> turns) {
  RequireTurns(turns);
  F1Counts total;
  for (const auto& t : turns) total += ActionCounts(*t.pred_action, *t.gold_action);
  return total.F1();
}

double Agreement(std::span<const TransitionRule> a, std::span<const TransitionRule> b) {
  std::set<std::string> left;
  std::set<std::string> right;
  for (const auto& rule : a) left.insert(CanonicalizeRule(rule));
  for (const auto& rule : b) right.insert(CanonicalizeRule(rule));
  if (left.empty() && right.empty()) return 1.0;
  std::size_t shared = 0;
  for (const auto& key : left) shared += right.contains(key) ? 1 : 0;
  const std::size_t unioned = left.size() + right.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(unioned);
}

MeanStd Aggregate(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

SignTestResult SignTest(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::kNoPairs, "sign test over zero pairs");
  SignTestResult r;
  for (const auto& [a, b] : pairs) {
    if (a > b) {
      ++r.wins;
    } else if (a < b) {
      ++r.losses;
    } else {
      ++r.ties;
    }
  }
  r.m = r.wins + r.losses;
  if (r.m == 0) {
    r.p_value = 1.0;
    r.p_numerator = 1;
  } else if (r.m <= 62) {
    // Upper binomial tail P(X >= wins), X ~ Bin(m, 1/2), as an exact dyadic.
    std::uint64_t tail = 0;
    std::uint64_t binom = 1;  // C(m, k) for k from 0 upwards
    for (int k = 0; k <= r.m; ++k) {
      if (k >= r.wins) tail += binom;
      binom = static_cast<std::uint64_t>(static_cast<unsigned __int128>(binom) *
                                         static_cast<unsigned>(r.m - k) /
                                         static_cast<unsigned>(k + 1));
    }
    r.p_numerator = tail;
    r.p_value = std::ldexp(static_cast<double>(tail), -r.m);
  } else {
    double tail = 0.0;
    for (int k = r.wins; k <= r.m; ++k) {
      tail += std::exp(std::lgamma(r.m + 1.0) - std::lgamma(k + 1.0) -
                       std::lgamma(r.m - k + 1.0) - r.m * std::log(2.0));
    }
    r.p_value = std::min(1.0, tail);
    r.p_numerator = 0;
  }
  for (int level : {90, 95, 99}) {
    // Compare p <= 1 - L/100 in integers where the exact form is available.
    bool significant;
    if (r.p_numerator > 0) {
      const unsigned __int128 lhs = static_cast<unsigned __int128>(r.p_numerator) * 100;
      const unsigned __int128 rhs = static_cast<unsigned __int128>(100 - level) << r.m;
      significant = lhs <= rhs;
    } else {
      significant = r.p_value <= (100 - level) / 100.0;
    }
    if (significant) r.significant_at.insert(level);
  }
  return r;
}

std::string SignificanceMarkers(const SignTestResult& result) {
  std::string out;
  if (result.significant_at.contains(90)) out += "†";
  if (result.significant_at.contains(95)) out += "◇";
  if (result.significant_at.contains(99)) out += "★";
  return out;
}

}  // namespace clinn
