#include <doctest.h>

#include <random>

#include "clinn/error.hpp"
#include "clinn/metrics.hpp"
#include "clinn/report.hpp"
#include "test_helpers.hpp"

using namespace clinn;
using namespace clinn::testing;

namespace {

const std::vector<std::string>& Slots() { return Onto().slots; }

struct Turn {
  BeliefState pred_b, gold_b;
  std::vector<ActItem> pred_a, gold_a;
  TurnPair pair() const { return {&pred_b, &gold_b, &pred_a, &gold_a}; }
};

std::vector<TurnPair> Pairs(const std::vector<Turn>& turns) {
  std::vector<TurnPair> out;
  for (const auto& t : turns) out.push_back(t.pair());
  return out;
}

}  // namespace

TEST_CASE("slot accuracy fixtures") {
  BeliefState pred{{"food", V("thai")}, {"area", V("centre")}};
  BeliefState gold{{"food", V("thai")}, {"area", V("west")}};
  CHECK(SlotAccuracy(pred, gold, Slots()) == doctest::Approx(6.0 / 7.0).epsilon(1e-12));
  CHECK(SlotAccuracy(gold, gold, Slots()) == 1.0);
  CHECK(SlotAccuracy({}, {}, Slots()) == 1.0);
  CHECK_THROWS_AS(SlotAccuracy({}, {}, std::vector<std::string>{}), Error);
}

TEST_CASE("joint goal") {
  const BeliefState right{{"food", V("thai")}};
  const BeliefState wrong{{"food", V("chinese")}};
  std::vector<Turn> turns{{right, right, {}, {}}, {wrong, right, {}, {}}};
  CHECK(JointGoal(Pairs(turns), Slots()) == 0.5);
  turns[1].pred_b = right;
  CHECK(JointGoal(Pairs(turns), Slots()) == 1.0);

  BeliefState pred{{"food", V("thai")}, {"area", V("centre")}};
  BeliefState gold{{"food", V("thai")}, {"area", V("west")}};
  std::vector<Turn> one{{pred, gold, {}, {}}};
  CHECK(JointGoal(Pairs(one), Slots()) == 0.0);
  CHECK_THROWS_AS(JointGoal({}, Slots()), Error);
}

TEST_CASE("slot F1 fixtures") {
  BeliefState pred{{"food", V("thai")}, {"area", V("centre")}};
  BeliefState gold{{"food", V("thai")}, {"area", V("west")}};
  F1Counts counts = SlotCounts(pred, gold);
  CHECK(counts.tp == 1);
  CHECK(counts.fp == 1);
  CHECK(counts.fn == 1);
  std::vector<Turn> turns{{pred, gold, {}, {}}};
  CHECK(SlotF1(Pairs(turns)) == doctest::Approx(0.5).epsilon(1e-12));
  turns[0].pred_b = gold;
  CHECK(SlotF1(Pairs(turns)) == 1.0);
  turns[0].pred_b = {};
  CHECK(SlotF1(Pairs(turns)) == 0.0);
  CHECK_THROWS_AS(SlotF1({}), Error);
}

TEST_CASE("action F1 fixtures") {
  std::vector<Turn> turns{{{}, {}, {A("request", "food")}, {A("request", "food"), A("request", "area")}}};
  CHECK(ActionF1(Pairs(turns)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  turns[0].pred_a = turns[0].gold_a;
  CHECK(ActionF1(Pairs(turns)) == 1.0);
  // A turn with both sides empty contributes no counts.
  turns.push_back({{}, {}, {}, {}});
  CHECK(ActionF1(Pairs(turns)) == 1.0);
  CHECK(ActionCounts({}, {}).tp + ActionCounts({}, {}).fp + ActionCounts({}, {}).fn == 0);
  // Items compare on act, slot and value.
  CHECK(ActionCounts({A("inform", "food", "thai")}, {A("inform", "food")}).tp == 0);
}

namespace {

BeliefState RandomBelief(std::mt19937& rng) {
  const char* values[] = {"a", "b", "c"};
  BeliefState b;
  for (const char* slot : {"food", "area", "pricerange", "day"}) {
    if (rng() % 2) b.emplace(slot, V(values[rng() % 3]));
  }
  return b;
}

std::vector<ActItem> RandomActs(std::mt19937& rng) {
  std::vector<ActItem> acts;
  for (unsigned k = rng() % 4; k > 0; --k) {
    switch (rng() % 3) {
      case 0: acts.push_back(A("request", rng() % 2 ? "food" : "area")); break;
      case 1: acts.push_back(A("inform", "food", rng() % 2 ? "a" : "b")); break;
      default: acts.push_back(A("bye")); break;
    }
  }
  return acts;
}

// Independent recount of micro F1 from (slot, value) / item strings.
double RecountF1(const std::vector<std::set<std::string>>& pred,
                 const std::vector<std::set<std::string>>& gold) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (const auto& x : pred[i]) (gold[i].count(x) ? tp : fp)++;
    for (const auto& x : gold[i]) fn += pred[i].count(x) ? 0 : 1;
  }
  if (tp == 0) return (fp == 0 && fn == 0) ? 1.0 : 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

}  // namespace

TEST_CASE("metric properties on random reports") {
  std::mt19937 rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<Turn> turns(1 + rng() % 6);
    std::vector<std::set<std::string>> ps, gs, pa, ga;
    for (auto& t : turns) {
      t.gold_b = RandomBelief(rng);
      t.pred_b = rng() % 3 == 0 ? t.gold_b : RandomBelief(rng);
      t.gold_a = RandomActs(rng);
      t.pred_a = rng() % 3 == 0 ? t.gold_a : RandomActs(rng);
      std::set<std::string> a, b, c, d;
      for (const auto& [s, v] : t.pred_b) a.insert(s + "=" + v.text());
      for (const auto& [s, v] : t.gold_b) b.insert(s + "=" + v.text());
      for (const auto& x : t.pred_a) c.insert(ToString(x));
      for (const auto& x : t.gold_a) d.insert(ToString(x));
      ps.push_back(a);
      gs.push_back(b);
      pa.push_back(c);
      ga.push_back(d);
    }
    const auto pairs = Pairs(turns);
    const double jg = JointGoal(pairs, Slots());
    const double sa = MeanSlotAccuracy(pairs, Slots());
    CHECK(0.0 <= jg);
    CHECK(jg <= sa);
    CHECK(sa <= 1.0);
    CHECK(SlotF1(pairs) == doctest::Approx(RecountF1(ps, gs)).epsilon(1e-12));
    CHECK(ActionF1(pairs) == doctest::Approx(RecountF1(pa, ga)).epsilon(1e-12));

    bool exact = true;
    for (const auto& t : turns) exact = exact && t.pred_b == t.gold_b && CanonicalSorted(t.pred_a) == CanonicalSorted(t.gold_a);
    const bool all_one = jg == 1.0 && sa == 1.0 && SlotF1(pairs) == 1.0 && ActionF1(pairs) == 1.0;
    CHECK(exact == all_one);
  }
}

TEST_CASE("agreement") {
  RuleSet a = Rules(
      "rule a: belief { user { inform(food(?X)) } => { food(?X) } }\n"
      "rule b: belief { user { inform(area(?X)) } => { area(?X) } }\n"
      "rule c: belief { user { inform(pricerange(?X)) } => { pricerange(?X) } }\n");
  RuleSet b = Rules(
      "rule b2: belief { user { inform(area(?Q)) } => { area(?Q) } }\n"
      "rule c2: belief { user { inform(pricerange(?R)) } => { pricerange(?R) } }\n"
      "rule d2: belief { user { inform(day(?S)) } => { day(?S) } }\n");
  RuleSet d = Rules("rule z: belief { user { bye() } => { } }\n");
  CHECK(Agreement(a.belief_rules, b.belief_rules) == 0.5);
  CHECK(Agreement(b.belief_rules, a.belief_rules) == 0.5);
  CHECK(Agreement(a.belief_rules, a.belief_rules) == 1.0);
  CHECK(Agreement(a.belief_rules, d.belief_rules) == 0.0);
  CHECK(Agreement(a.action_rules, b.action_rules) == 1.0);
}

TEST_CASE("aggregate") {
  const std::vector<double> values{1.0, 2.0, 3.0};
  MeanStd s = Aggregate(values);
  CHECK(s.mean == 2.0);
  CHECK(s.std == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> one{0.25};
  CHECK(Aggregate(one).mean == 0.25);
  CHECK(Aggregate(one).std == 0.0);
  const std::vector<double> same{0.4, 0.4, 0.4, 0.4};
  CHECK(Aggregate(same).std == 0.0);
}

namespace {

std::vector<std::pair<double, double>> Pairs(int wins, int losses, int ties) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < wins; ++i) out.emplace_back(0.6, 0.5);
  for (int i = 0; i < losses; ++i) out.emplace_back(0.4, 0.5);
  for (int i = 0; i < ties; ++i) out.emplace_back(0.5, 0.5);
  return out;
}

}  // namespace

TEST_CASE("sign test fixtures") {
  SignTestResult r = SignTest(Pairs(6, 0, 0));
  CHECK(r.p_value == 0.015625);
  CHECK(r.p_numerator == 1);
  CHECK(r.m == 6);
  CHECK(r.significant_at == std::set<int>{90, 95});
  CHECK(SignificanceMarkers(r) == "†◇");

  r = SignTest(Pairs(5, 1, 0));
  CHECK(r.p_value == 0.109375);
  CHECK(r.p_numerator == 7);
  CHECK(r.significant_at.empty());

  r = SignTest(Pairs(4, 0, 2));
  CHECK(r.wins + r.losses + r.ties == 6);
  CHECK(r.m == 4);
  CHECK(r.p_value == 0.0625);
  CHECK(r.significant_at == std::set<int>{90});
  CHECK(SignificanceMarkers(r) == "†");

  r = SignTest(Pairs(0, 0, 3));
  CHECK(r.p_value == 1.0);
  CHECK(r.significant_at.empty());

  CHECK(SignTest(Pairs(8, 0, 0)).significant_at == std::set<int>{90, 95, 99});
  CHECK_THROWS_AS(SignTest({}), Error);
}

TEST_CASE("sign test p is non-increasing in wins") {
  for (int m = 1; m <= 70; m += 3) {
    double previous = 2.0;
    for (int w = 0; w <= m; ++w) {
      const double p = SignTest(Pairs(w, m - w, 0)).p_value;
      CHECK(p <= previous);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      previous = p;
    }
  }
}

TEST_CASE("report json") {
  EvalReport report;
  report.label = "base";
  report.seed_label = "s1";
  report.action_f1 = 2.0 / 3.0;
  report.joint_goal = 0.5;
  report.slot_accuracy = 6.0 / 7.0;
  report.slot_f1 = 1.0;
  report.turn_count = 2;
  report.turns.push_back({"d\"1", 0, "rule", "empty", {"r1"}, true, 7});
  const std::string text = SerializeReport(report);
  CHECK(text.find("\"action_f1\": 0.666667") != std::string::npos);
  CHECK(text.find("\"slot_f1\": 1.000000") != std::string::npos);
  const EvalReport back = ParseReport(text);
  CHECK(back.Metric("joint_goal") == 0.5);
  CHECK(back.Metric("slot_acc") == doctest::Approx(0.857143).epsilon(1e-9));
  CHECK(back.turns.at(0).dialogue_id == "d\"1");
  CHECK(SerializeReport(back) == text);
  CHECK_THROWS_AS(ParseReport("{\"action_f1\": 2}"), Error);
}
