#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "clinn/corpus.hpp"
#include "clinn/error.hpp"
#include "clinn/random.hpp"

namespace clinn {
namespace {

constexpr std::string_view kOracleRules = R"(# Oracle rules for the synthetic restaurant script.
# Belief rules: the largest matching inform combination wins.
rule b_food_area_price: belief {
  user { inform(food(?F)), inform(area(?A)), inform(pricerange(?P)) }
  => { food(?F), area(?A), pricerange(?P) }
}
rule b_food_area: belief { user { inform(food(?F)), inform(area(?A)) } => { food(?F), area(?A) } }
rule b_food_price: belief {
  user { inform(food(?F)), inform(pricerange(?P)) } => { food(?F), pricerange(?P) }
}
rule b_area_price: belief {
  user { inform(area(?A)), inform(pricerange(?P)) } => { area(?A), pricerange(?P) }
}
rule b_food: belief { user { inform(food(?F)) } => { food(?F) } }
rule b_area: belief { user { inform(area(?A)) } => { area(?A) } }
rule b_price: belief { user { inform(pricerange(?P)) } => { pricerange(?P) } }
# Keeps the previous belief on turns without informs.
rule b_keep: belief { => { } }

# Action rules.
rule a_bye: action { user { bye() } => { bye() } }
rule a_address: action { user { request(address) } => { inform(address) } }
rule a_phone: action { user { request(phone) } => { inform(phone) } }
rule a_nooffer: action { db { eq(0) } => { nooffer() } }
rule a_unique: action { db { eq(1) } => { inform(name) } }
rule a_complete: action { belief { food(?F), area(?A), pricerange(?P) } => { inform(name) } }
rule a_ask_price: action { belief { food(?F), area(?A) } => { request(pricerange) } }
rule a_ask_area_fp: action { belief { food(?F), pricerange(?P) } => { request(area) } }
rule a_ask_food_ap: action { belief { area(?A), pricerange(?P) } => { request(food) } }
rule a_ask_area: action { belief { food(?F) } => { request(area) } }
rule a_ask_food_a: action { belief { area(?A) } => { request(food) } }
rule a_ask_food_p: action { belief { pricerange(?P) } => { request(food) } }
)";

constexpr std::array<const char*, 3> kConstraintSlots = {"food", "area", "pricerange"};
constexpr std::size_t kMaxTurns = 12;

ActItem Act(const char* act, std::optional<std::string> slot = std::nullopt,
            std::optional<Value> value = std::nullopt) {
  return ActItem{act, std::move(slot), std::move(value)};
}

bool HasAct(const std::vector<ActItem>& acts, const char* act, const char* slot) {
  return std::any_of(acts.begin(), acts.end(), [&](const ActItem& a) {
    return a.act == act && (slot == nullptr ? !a.slot : a.slot == slot) && !a.value;
  });
}

// The system policy the oracle rules encode, written independently of them.
std::vector<ActItem> SystemPolicy(const std::vector<ActItem>& user, const BeliefState& belief,
                                  std::int64_t count) {
  if (HasAct(user, "bye", nullptr)) return {Act("bye")};
  if (HasAct(user, "request", "address")) return {Act("inform", "address")};
  if (HasAct(user, "request", "phone")) return {Act("inform", "phone")};
  if (count == 0) return {Act("nooffer")};
  if (count == 1) return {Act("inform", "name")};
  const bool food = belief.contains("food");
  const bool area = belief.contains("area");
  const bool price = belief.contains("pricerange");
  if (food && area && price) return {Act("inform", "name")};
  if (food && area) return {Act("request", "pricerange")};
  if (food && price) return {Act("request", "area")};
  if (area && price) return {Act("request", "food")};
  if (food) return {Act("request", "area")};
  if (area || price) return {Act("request", "food")};
  return {};
}

struct UserGoal {
  std::map<std::string, Value> target;
  std::optional<std::string> wrong_slot;
  std::optional<Value> wrong_value;
};

class DialogueSimulator {
 public:
  DialogueSimulator(SplitMix64& rng, const RestaurantDb& db,
                    const std::map<std::string, std::vector<Value>>& values)
      : rng_(rng), db_(db), values_(values) {}

  Dialogue Run(std::string id) {
    Dialogue dialogue;
    dialogue.id = std::move(id);
    PickGoal();

    BeliefState belief;
    std::vector<ActItem> user = OpeningTurn();
    while (true) {
      DialogueTurn turn;
      turn.index = static_cast<int>(dialogue.turns.size());
      turn.user_acts = CanonicalSorted(user);
      for (const auto& act : turn.user_acts) {
        if (act.act == "inform" && act.slot && act.value) {
          belief.insert_or_assign(*act.slot, *act.value);
        }
      }
      turn.gold_belief = belief;
      turn.gold_action = CanonicalSorted(SystemPolicy(turn.user_acts, belief, DbCount(db_, belief)));
      turn.utterance = Utterance(turn.user_acts);
      const bool finished = HasAct(turn.user_acts, "bye", nullptr);
      const std::vector<ActItem> system = turn.gold_action;
      dialogue.turns.push_back(std::move(turn));
      if (finished) break;
      user = dialogue.turns.size() + 1 >= kMaxTurns ? std::vector<ActItem>{Act("bye")}
                                                    : NextUserTurn(system);
    }
    return dialogue;
  }

 private:
  void PickGoal() {
    goal_ = {};
    informed_.clear();
    wrong_active_ = false;
    asked_address_ = asked_phone_ = false;
    const auto& entity = db_.entities[rng_.Below(db_.entities.size())];
    for (const char* slot : kConstraintSlots) {
      auto it = entity.find(slot);
      if (it != entity.end()) goal_.target.emplace(slot, it->second);
    }
    if (rng_.Chance(0.25)) {
      std::vector<std::string> candidates;
      for (const auto& [slot, value] : goal_.target) {
        if (values_.at(slot).size() > 1) candidates.push_back(slot);
      }
      if (!candidates.empty()) {
        const std::string& slot = candidates[rng_.Below(candidates.size())];
        std::vector<Value> others;
        for (const auto& v : values_.at(slot)) {
          if (v != goal_.target.at(slot)) others.push_back(v);
        }
        goal_.wrong_slot = slot;
        goal_.wrong_value = others[rng_.Below(others.size())];
      }
    }
  }

  // Slots of the goal not yet mentioned, in fixed slot order.
  std::vector<std::string> Remaining() const {
    std::vector<std::string> out;
    for (const auto& [slot, value] : goal_.target) {
      if (std::find(informed_.begin(), informed_.end(), slot) == informed_.end()) {
        out.push_back(slot);
      }
    }
    return out;
  }

  ActItem InformSlot(const std::string& slot) {
    informed_.push_back(slot);
    if (goal_.wrong_slot == slot) {
      wrong_active_ = true;
      return Act("inform", slot, *goal_.wrong_value);
    }
    return Act("inform", slot, goal_.target.at(slot));
  }

  std::vector<ActItem> OpeningTurn() {
    std::vector<std::string> slots = Remaining();
    for (std::size_t i = slots.size(); i > 1; --i) {
      std::swap(slots[i - 1], slots[rng_.Below(i)]);
    }
    const std::size_t k = 1 + rng_.Below(slots.size());
    std::vector<ActItem> acts;
    for (std::size_t i = 0; i < k; ++i) acts.push_back(InformSlot(slots[i]));
    return acts;
  }

  std::vector<ActItem> NextUserTurn(const std::vector<ActItem>& system) {
    if (wrong_active_ &&
        (HasAct(system, "nooffer", nullptr) || HasAct(system, "inform", "name"))) {
      const std::string slot = *goal_.wrong_slot;
      wrong_active_ = false;
      goal_.wrong_slot.reset();
      return {Act("inform", slot, goal_.target.at(slot))};
    }
    for (const auto& act : system) {
      if (act.act == "request" && act.slot && goal_.target.contains(*act.slot)) {
        std::vector<ActItem> acts;
        if (std::find(informed_.begin(), informed_.end(), *act.slot) == informed_.end()) {
          acts.push_back(InformSlot(*act.slot));
        } else {
          acts.push_back(Act("inform", *act.slot, goal_.target.at(*act.slot)));
        }
        std::vector<std::string> rest = Remaining();
        if (!rest.empty() && rng_.Chance(0.3)) {
          acts.push_back(InformSlot(rest[rng_.Below(rest.size())]));
        }
        return acts;
      }
    }
    if (HasAct(system, "nooffer", nullptr)) {
      return {Act("bye")};
    }
    if (!asked_address_ && rng_.Chance(0.5)) {
      asked_address_ = true;
      return {Act("request", "address")};
    }
    if (!asked_phone_ && rng_.Chance(0.5)) {
      asked_phone_ = true;
      return {Act("request", "phone")};
    }
    return {Act("bye")};
  }

  static std::string Utterance(const std::vector<ActItem>& acts) {
    std::vector<std::string> parts;
    for (const auto& act : acts) {
      if (act.act == "inform" && act.slot && act.value) {
        parts.push_back(fmt::format("{} {}", *act.slot, act.value->text()));
      } else if (act.act == "request" && act.slot) {
        parts.push_back(fmt::format("what is the {}?", *act.slot));
      } else if (act.act == "bye") {
        parts.push_back("thanks, goodbye");
      }
    }
    return fmt::format("{}", fmt::join(parts, ", "));
  }

  SplitMix64& rng_;
  const RestaurantDb& db_;
  const std::map<std::string, std::vector<Value>>& values_;
  UserGoal goal_;
  std::vector<std::string> informed_;
  bool wrong_active_ = false;
  bool asked_address_ = false;
  bool asked_phone_ = false;
};

}  // namespace

std::string_view SyntheticOracleRules() { return kOracleRules; }

SyntheticData GenSynthetic(std::size_t n, std::uint64_t seed, const RestaurantDb& db,
                           const Ontology& ontology) {
  SyntheticData out;
  out.rules_text = std::string(kOracleRules);
  out.rules = ParseRules(out.rules_text, ontology, "synthetic-oracle");
  out.corpus.domain = ontology.domain;
  if (n == 0) return out;
  if (db.entities.empty()) {
    throw Error(ErrorKind::kSchema, "synthetic generation needs a non-empty db");
  }

  std::map<std::string, std::vector<Value>> values;
  for (const auto& entity : db.entities) {
    for (const auto& [slot, value] : entity) {
      auto& list = values[slot];
      if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
    }
  }
  for (auto& [slot, list] : values) std::sort(list.begin(), list.end());
  for (const char* slot : kConstraintSlots) values[slot];

  SplitMix64 rng(seed);
  DialogueSimulator simulator(rng, db, values);
  for (std::size_t i = 0; i < n; ++i) {
    out.corpus.dialogues.push_back(simulator.Run(fmt::format("syn{:05d}", i)));
  }
  return out;
}

}  // namespace clinn
