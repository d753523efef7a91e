// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "clinn/error.hpp"
#include "clinn/metrics.hpp"
#include "clinn/report.hpp"
#include "clinn/tracker.hpp"
#include "match_oracle.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace clinn;
using namespace clinn::testing;

namespace {

// A failed check records its message; the criterion keeps running so the
// detail line lists the first problem only.
struct Check {
  std::string failure;
  std::string detail;
  void Expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

int failures = 0;

void Criterion(int number, const char* name, double limit_seconds,
               const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.Expect(false, fmt::format("exception: {}", e.what()));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && seconds >= limit_seconds) {
    check.Expect(false, fmt::format("took {:.3f}s, limit {:.0f}s", seconds, limit_seconds));
  }
  const bool ok = check.failure.empty();
  failures += ok ? 0 : 1;
  std::printf("[%s] %d. %s (%.3fs) %s\n", ok ? "PASS" : "FAIL", number, name, seconds,
              ok ? check.detail.c_str() : check.failure.c_str());
}

const std::string kData = CLINN_DATA_DIR;

RestaurantDb DataDb() { return LoadDb(kData + "/restaurants.json", Onto()); }

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WorkedExample(Check& c) {
  std::string json = "[";
  for (int i = 0; i < 7; ++i) {
    json += fmt::format(R"({{"name":"t{}","food":"thai","area":"west","pricerange":"cheap"}},)", i);
  }
  json += R"({"name":"x","food":"thai","area":"north","pricerange":"cheap"}])";
  const RestaurantDb db = ParseDb(json, Onto());
  const RuleSet rules = LoadRules(kData + "/worked_example.rules", Onto());
  DialogueTurn turn;
  turn.user_acts = WorkedState().user;
  turn.user_acts.push_back(A("request", "address"));
  const PriorState prior{{{"area", V("west")}}, {A("request", "food")}};
  StepTrace trace;
  const TurnOutcome out = Step(prior, "s", turn, {rules, db, Onto()}, TrackerConfig{}, &trace);

  const Substitution xy{{"X", V("thai")}, {"Y", V("west")}};
  c.Expect(out.db_count == 7, "db count is not 7");
  c.Expect(out.belief == BeliefState{{"area", V("west")}, {"food", V("thai")}},
           "B_t = " + ToString(out.belief));
  c.Expect(out.action == std::vector<ActItem>{A("inform", "address"), A("request", "price")},
           "A_t wrong");
  c.Expect(trace.belief_fired && trace.belief_fired->substitution == xy, "R1 substitution");
  c.Expect(trace.action_fired && trace.action_fired->substitution == xy, "R2 substitution");
  c.detail = fmt::format("B_t={} A_t={{{}, {}}}", ToString(out.belief), ToString(out.action[0]),
                         ToString(out.action[1]));
}

void OracleEquivalence(Check& c) {
  std::mt19937 rng(2024);
  int compared = 0, fired = 0, disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    oracle::Instance inst = oracle::RandomInstance(rng);
    for (ApplyMode apply : {ApplyMode::kFull, ApplyMode::kFree}) {
      if (!RetainedUnder(inst.rule, apply)) continue;
      for (MatchMode match : {MatchMode::kSubset, MatchMode::kExactSet}) {
        auto got = RuleFires(inst.rule, inst.ctx, apply, match);
        auto want = oracle::BruteForce(inst.rule, inst.ctx, apply, match, inst.universe);
        ++compared;
        fired += want.fires;
        if (got.has_value() != want.fires || (got && got->substitution != want.subst)) {
          ++disagreements;
        }
      }
    }
  }
  c.Expect(disagreements == 0, fmt::format("{} disagreements", disagreements));
  c.Expect(fired > 0, "no instance fired");
  c.detail = fmt::format("1000 instances, {} comparisons, {} firing, 0 disagreements", compared,
                         fired);
}

void FullToFree(Check& c) {
  std::mt19937 rng(77);
  int pairs = 0, full_fired = 0, violations = 0;
  while (pairs < 1000) {
    oracle::Instance inst = oracle::RandomInstance(rng);
    if (!RetainedUnder(inst.rule, ApplyMode::kFree)) continue;
    ++pairs;
    for (MatchMode match : {MatchMode::kSubset, MatchMode::kExactSet}) {
      if (!RuleFires(inst.rule, inst.ctx, ApplyMode::kFull, match)) continue;
      ++full_fired;
      if (!RuleFires(inst.rule, inst.ctx, ApplyMode::kFree, match)) ++violations;
    }
  }
  c.Expect(violations == 0, fmt::format("{} violations", violations));
  c.Expect(full_fired > 0, "no Full firing");
  c.detail = fmt::format("1000 pairs, {} Full firings, 0 violations", full_fired);
}

void MetricFixtures(Check& c) {
  const BeliefState pred{{"food", V("thai")}, {"area", V("centre")}};
  const BeliefState gold{{"food", V("thai")}, {"area", V("west")}};
  const std::vector<ActItem> pa{A("request", "food")};
  const std::vector<ActItem> ga{A("request", "food"), A("request", "area")};
  const std::vector<TurnPair> one{{&pred, &gold, &pa, &ga}};
  const double sa = SlotAccuracy(pred, gold, Onto().slots);
  const double sf = SlotF1(one);
  const double af = ActionF1(one);
  c.Expect(std::fabs(sa - 6.0 / 7.0) < 1e-9, fmt::format("slot accuracy {}", sa));
  c.Expect(std::fabs(sf - 0.5) < 1e-9, fmt::format("slot F1 {}", sf));
  c.Expect(std::fabs(af - 2.0 / 3.0) < 1e-9, fmt::format("action F1 {}", af));

  std::mt19937 rng(31);
  const char* slots[] = {"food", "area", "pricerange", "name", "day"};
  const char* values[] = {"a", "b", "c"};
  auto random_belief = [&] {
    BeliefState b;
    for (const char* s : slots) {
      if (rng() % 2) b.emplace(s, V(values[rng() % 3]));
    }
    return b;
  };
  int violations = 0;
  for (int corpus = 0; corpus < 100; ++corpus) {
    std::vector<BeliefState> p(1 + rng() % 20), g(p.size());
    std::vector<ActItem> none;
    std::vector<TurnPair> pairs;
    for (std::size_t i = 0; i < p.size(); ++i) {
      g[i] = random_belief();
      p[i] = rng() % 2 ? g[i] : random_belief();
    }
    for (std::size_t i = 0; i < p.size(); ++i) pairs.push_back({&p[i], &g[i], &none, &none});
    if (JointGoal(pairs, Onto().slots) > MeanSlotAccuracy(pairs, Onto().slots)) ++violations;
  }
  c.Expect(violations == 0, fmt::format("JG > SA on {} corpora", violations));
  c.detail = fmt::format("SA={:.9f} SF1={:.9f} AF1={:.9f}; JG<=SA on 100 corpora", sa, sf, af);
}

void OracleEndToEnd(Check& c) {
  const RestaurantDb db = DataDb();
  const SyntheticData data = GenSynthetic(50, 7, db, Onto());
  // Replay the rules from their emitted text, as the CLI does.
  const RuleSet rules = ParseRules(data.rules_text, Onto());
  const EvalReport report = RunCorpus(data.corpus, {rules, db, Onto()}, TrackerConfig{});
  const std::string jg = fmt::format("{:.6f}", report.joint_goal);
  const std::string af = fmt::format("{:.6f}", report.action_f1);
  c.Expect(report.joint_goal == 1.0, "joint goal " + jg);
  c.Expect(report.action_f1 == 1.0, "action F1 " + af);
  c.detail = fmt::format("{} dialogues, {} turns, JG={} AF1={}", report.dialogue_count,
                         report.turn_count, jg, af);
}

void HybridOverride(Check& c) {
  const RestaurantDb db = DataDb();
  const SyntheticData data = GenSynthetic(50, 7, db, Onto());
  PredictionMap preds = PredictionsFromGold(data.corpus);
  const std::size_t corrupted = CorruptBeliefs(preds, 0.3, 13, db);
  TrackerConfig hybrid;
  hybrid.engine = Engine::kHybrid;
  const RuleSet none;
  const EvalReport only = RunCorpus(data.corpus, {none, db, Onto(), &preds}, hybrid);
  const EvalReport with_rules = RunCorpus(data.corpus, {data.rules, db, Onto(), &preds}, hybrid);
  c.Expect(corrupted > 0, "nothing corrupted");
  c.Expect(only.joint_goal < 1.0, "prediction-only joint goal is 1");
  c.Expect(with_rules.joint_goal == 1.0, fmt::format("hybrid JG {:.6f}", with_rules.joint_goal));
  c.detail = fmt::format("{}/{} beliefs corrupted; prediction-only JG={:.6f}, hybrid JG={:.6f}",
                         corrupted, preds.size(), only.joint_goal, with_rules.joint_goal);
}

void SignTestExact(Check& c) {
  struct Case {
    int wins, losses, ties;
    long long numerator;
    int m;
    const char* markers;
  };
  const Case cases[] = {{6, 0, 0, 1, 6, "†◇"}, {5, 1, 0, 7, 6, ""}, {4, 0, 2, 1, 4, "†"}};
  std::vector<std::string> shown;
  for (const Case& k : cases) {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < k.wins; ++i) pairs.emplace_back(1.0, 0.0);
    for (int i = 0; i < k.losses; ++i) pairs.emplace_back(0.0, 1.0);
    for (int i = 0; i < k.ties; ++i) pairs.emplace_back(0.5, 0.5);
    const SignTestResult r = SignTest(pairs);
    const double expected = std::ldexp(static_cast<double>(k.numerator), -k.m);
    const std::string label = fmt::format("({}W,{}L,{}T)", k.wins, k.losses, k.ties);
    c.Expect(r.p_numerator == k.numerator && r.m == k.m, label + " p is not exact");
    c.Expect(r.p_value == expected, label + fmt::format(" p={}", r.p_value));
    c.Expect(SignificanceMarkers(r) == k.markers, label + " markers " + SignificanceMarkers(r));
    shown.push_back(fmt::format("{} p={}/2^{}={} [{}]", label, static_cast<long long>(r.p_numerator),
                                r.m, r.p_value, SignificanceMarkers(r)));
  }
  c.detail = fmt::format("{}", fmt::join(shown, "; "));
}

void AgreementSuite(Check& c) {
  const RuleSet a = Rules(
      "rule a: belief { user { inform(food(?X)) } belief { area(?Y) } => { area(?Y), food(?X) } }\n"
      "rule b: belief { user { inform(area(?X)) } => { area(?X) } }\n"
      "rule c: belief { user { inform(pricerange(?X)) } => { pricerange(?X) } }\n");
  // Alpha variants of a and b, reordered, plus one rule of its own.
  const RuleSet b = Rules(
      "rule b2: belief { user { inform(area(?Q)) } => { area(?Q) } }\n"
      "rule a2: belief { belief { area(?P) } user { inform(food(?R)) } => { food(?R), area(?P) } }\n"
      "rule d2: belief { user { inform(day(?S)) } => { day(?S) } }\n"
      "rule e2: belief { user { inform(name(?S)) } => { name(?S) } }\n");
  const RuleSet d = Rules("rule z: belief { user { bye() } => { } }\n");
  const RuleSet alpha = Rules(
      "rule p: belief { user { inform(food(?M)) } belief { area(?N) } => { food(?M), area(?N) } }\n"
      "rule q: belief { user { inform(area(?K)) } => { area(?K) } }\n"
      "rule r: belief { user { inform(pricerange(?J)) } => { pricerange(?J) } }\n");
  const auto& ab = a.belief_rules;
  const double jab = Agreement(ab, b.belief_rules);
  c.Expect(jab == Agreement(b.belief_rules, ab), "not symmetric");
  c.Expect(Agreement(ab, ab) == 1.0, "not reflexive");
  c.Expect(Agreement(ab, d.belief_rules) == 0.0, "disjoint is not 0");
  c.Expect(jab == 0.4, fmt::format("J(a,b)={} want 2/5", jab));
  c.Expect(Agreement(ab, alpha.belief_rules) == 1.0, "alpha variants differ");

  // Classic half overlap: {r1,r2,r3} vs {r2,r3,r4}.
  const RuleSet h = Rules(
      "rule b: belief { user { inform(area(?X)) } => { area(?X) } }\n"
      "rule c: belief { user { inform(pricerange(?X)) } => { pricerange(?X) } }\n"
      "rule d: belief { user { inform(day(?X)) } => { day(?X) } }\n");
  const double half = Agreement(ab, h.belief_rules);
  c.Expect(half == 0.5, fmt::format("half fixture {}", half));
  c.detail = fmt::format("reflexive=1 disjoint=0 J={} half={} alpha=1", jab, half);
}

void Determinism(Check& c) {
  const fs::path dir = fs::temp_directory_path() / fmt::format("clinn_accept_{}", ::getpid());
  fs::create_directories(dir);
  const std::string bin = CLINN_BINARY;
  auto run = [&](const std::string& args) {
    return std::system((bin + " " + args + " >/dev/null").c_str());
  };
  const std::string corpus = (dir / "c.json").string();
  const std::string rules = (dir / "o.rules").string();
  c.Expect(run(fmt::format("gen --n 60 --seed 11 --db {}/restaurants.json --out-corpus {} "
                           "--out-rules {}",
                           kData, corpus, rules)) == 0,
           "gen failed");
  // Drop the first belief rule so reports carry a mix of fallbacks.
  std::string text = Slurp(rules);
  std::ofstream(dir / "partial.rules") << text.substr(text.find("\nrule ", text.find("\nrule ") + 1));
  std::vector<std::string> reports;
  int k = 0;
  for (const char* jobs : {"1", "1", "4", "8"}) {
    const std::string out = (dir / fmt::format("r{}.json", k++)).string();
    c.Expect(run(fmt::format("replay --rules {} --corpus {} --db {}/restaurants.json --out {} "
                             "--seed-label s --jobs {}",
                             (dir / "partial.rules").string(), corpus, kData, out, jobs)) == 0,
             "replay failed");
    reports.push_back(Slurp(out));
  }
  for (const auto& r : reports) c.Expect(r == reports[0], "reports differ");
  c.Expect(reports[0].size() > 1000, "report is suspiciously small");
  c.detail = fmt::format("4 replays (jobs 1,1,4,8), {} bytes each, identical", reports[0].size());
  fs::remove_all(dir);
}

}  // namespace

int main() {
  Criterion(1, "worked example reproduction", 1.0, WorkedExample);
  Criterion(2, "matcher oracle equivalence", 10.0, OracleEquivalence);
  Criterion(3, "Full to Free monotonicity", 0, FullToFree);
  Criterion(4, "metric fixtures", 0, MetricFixtures);
  Criterion(5, "oracle end-to-end replay", 5.0, OracleEndToEnd);
  Criterion(6, "hybrid override recovers corrupted beliefs", 0, HybridOverride);
  Criterion(7, "sign test exactness", 0, SignTestExact);
  Criterion(8, "agreement suite", 0, AgreementSuite);
  Criterion(9, "replay determinism", 0, Determinism);
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
