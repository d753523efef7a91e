#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "clinn/corpus.hpp"
#include "clinn/error.hpp"
#include "clinn/random.hpp"

namespace clinn {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void SchemaFail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kSchema, where + ": " + what);
}

const json& Field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) SchemaFail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) SchemaFail(where, std::string("missing '") + key + "'");
  return *it;
}

std::string StringField(const json& value, const std::string& where) {
  if (!value.is_string()) SchemaFail(where, "expected a string");
  return value.get<std::string>();
}

Value ParseValueAt(const json& value, const std::string& where) {
  try {
    return Value::Parse(StringField(value, where));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kSchema) throw;
    SchemaFail(where, e.what());
  }
}

std::string LowerName(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

ActItem ParseAct(const json& obj, const Ontology& ontology, const std::string& where) {
  ActItem item;
  item.act = LowerName(StringField(Field(obj, "act", where), where + ".act"));
  if (!ontology.HasAct(item.act)) {
    throw Error(ErrorKind::kUnknownAct, where + ": unknown act '" + item.act + "'");
  }
  const bool has_value = obj.contains("value") && !obj.at("value").is_null();
  if (obj.contains("slot") && !obj.at("slot").is_null()) {
    std::string slot = LowerName(StringField(obj.at("slot"), where + ".slot"));
    if (!ontology.HasActSlot(slot, has_value)) {
      throw Error(ErrorKind::kUnknownSlot, where + ": unknown slot '" + slot + "'");
    }
    item.slot = std::move(slot);
  }
  if (has_value) {
    if (!item.slot) SchemaFail(where, "value without slot");
    item.value = ParseValueAt(obj.at("value"), where + ".value");
  }
  return item;
}

std::vector<ActItem> ParseActs(const json& list, const Ontology& ontology,
                               const std::string& where) {
  if (!list.is_array()) SchemaFail(where, "expected an array");
  std::vector<ActItem> acts;
  for (std::size_t i = 0; i < list.size(); ++i) {
    acts.push_back(ParseAct(list[i], ontology, fmt::format("{}[{}]", where, i)));
  }
  return CanonicalSorted(std::move(acts));
}

BeliefState ParseBelief(const json& obj, const Ontology& ontology, const std::string& where) {
  if (!obj.is_object()) SchemaFail(where, "expected an object");
  BeliefState belief;
  for (const auto& [key, value] : obj.items()) {
    std::string slot = LowerName(key);
    if (!ontology.HasSlot(slot)) {
      throw Error(ErrorKind::kUnknownSlot, where + ": unknown slot '" + slot + "'");
    }
    belief.insert_or_assign(slot, ParseValueAt(value, where + "." + key));
  }
  return belief;
}

ordered_json ActsJson(const std::vector<ActItem>& acts) {
  ordered_json out = ordered_json::array();
  for (const auto& act : CanonicalSorted(acts)) {
    ordered_json item;
    item["act"] = act.act;
    if (act.slot) item["slot"] = *act.slot;
    if (act.value) item["value"] = act.value->text();
    out.push_back(std::move(item));
  }
  return out;
}

ordered_json BeliefJson(const BeliefState& belief) {
  ordered_json out = ordered_json::object();
  for (const auto& [slot, value] : belief) out[slot] = value.text();
  return out;
}

json ParseJson(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    SchemaFail(where, e.what());
  }
}

}  // namespace

Corpus ParseCorpus(std::string_view json_text, const Ontology& ontology) {
  json doc = ParseJson(json_text, "corpus");
  Corpus corpus;
  if (doc.is_object() && doc.contains("domain")) {
    corpus.domain = StringField(doc.at("domain"), "corpus.domain");
  }
  const json& dialogues = Field(doc, "dialogues", "corpus");
  if (!dialogues.is_array()) SchemaFail("corpus.dialogues", "expected an array");
  std::set<std::string> ids;
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    const std::string where = fmt::format("dialogues[{}]", d);
    Dialogue dialogue;
    dialogue.id = StringField(Field(dialogues[d], "id", where), where + ".id");
    if (!ids.insert(dialogue.id).second) {
      throw Error(ErrorKind::kDuplicateDialogueId, "duplicate dialogue id '" + dialogue.id + "'");
    }
    const json& turns = Field(dialogues[d], "turns", where);
    if (!turns.is_array() || turns.empty()) SchemaFail(where + ".turns", "expected a non-empty array");
    for (std::size_t t = 0; t < turns.size(); ++t) {
      const std::string tw = fmt::format("{}.turns[{}]", where, t);
      DialogueTurn turn;
      const json& index = Field(turns[t], "turn", tw);
      if (!index.is_number_integer() || index.get<long long>() != static_cast<long long>(t)) {
        SchemaFail(tw + ".turn", fmt::format("expected turn index {}", t));
      }
      turn.index = static_cast<int>(t);
      turn.user_acts = ParseActs(Field(turns[t], "user_acts", tw), ontology, tw + ".user_acts");
      turn.gold_belief = ParseBelief(Field(turns[t], "gold_belief", tw), ontology,
                                     tw + ".gold_belief");
      turn.gold_action = ParseActs(Field(turns[t], "gold_action", tw), ontology,
                                   tw + ".gold_action");
      if (turns[t].contains("utterance") && !turns[t].at("utterance").is_null()) {
        turn.utterance = StringField(turns[t].at("utterance"), tw + ".utterance");
      }
      dialogue.turns.push_back(std::move(turn));
    }
    corpus.dialogues.push_back(std::move(dialogue));
  }
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path& path, const Ontology& ontology) {
  return ParseCorpus(ReadFile(path), ontology);
}

std::string SerializeCorpus(const Corpus& corpus) {
  ordered_json doc;
  doc["domain"] = corpus.domain;
  doc["dialogues"] = ordered_json::array();
  for (const auto& dialogue : corpus.dialogues) {
    ordered_json d;
    d["id"] = dialogue.id;
    d["turns"] = ordered_json::array();
    for (const auto& turn : dialogue.turns) {
      ordered_json t;
      t["turn"] = turn.index;
      t["user_acts"] = ActsJson(turn.user_acts);
      t["gold_belief"] = BeliefJson(turn.gold_belief);
      t["gold_action"] = ActsJson(turn.gold_action);
      if (turn.utterance) t["utterance"] = *turn.utterance;
      d["turns"].push_back(std::move(t));
    }
    doc["dialogues"].push_back(std::move(d));
  }
  return doc.dump(2) + "\n";
}

Corpus SampleCorpus(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  const std::size_t size = corpus.dialogues.size();
  if (n > size) {
    throw Error(ErrorKind::kSampleTooLarge,
                fmt::format("cannot sample {} dialogues from {}", n, size));
  }
  std::vector<const Dialogue*> order;
  for (const auto& d : corpus.dialogues) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.Below(size - i));
    std::swap(order[i], order[j]);
  }
  order.resize(n);
  std::sort(order.begin(), order.end(),
            [](const Dialogue* a, const Dialogue* b) { return a->id < b->id; });
  Corpus out;
  out.domain = corpus.domain;
  for (const Dialogue* d : order) out.dialogues.push_back(*d);
  return out;
}

PredictionMap ParsePredictions(std::string_view jsonl_text, const Ontology& ontology) {
  PredictionMap out;
  std::istringstream in{std::string(jsonl_text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = fmt::format("predictions line {}", line_no);
    json obj = ParseJson(line, where);
    PredictionRecord record;
    record.dialogue_id = StringField(Field(obj, "dialogue_id", where), where + ".dialogue_id");
    const json& turn = Field(obj, "turn", where);
    if (!turn.is_number_integer() || turn.get<long long>() < 0) {
      SchemaFail(where + ".turn", "expected a non-negative integer");
    }
    record.turn = turn.get<int>();
    record.belief = ParseBelief(Field(obj, "belief", where), ontology, where + ".belief");
    record.action = ParseActs(Field(obj, "action", where), ontology, where + ".action");
    PredictionKey key{record.dialogue_id, record.turn};
    if (!out.emplace(key, std::move(record)).second) {
      throw Error(ErrorKind::kDuplicatePrediction,
                  fmt::format("duplicate prediction for ({}, {})", key.first, key.second));
    }
  }
  return out;
}

PredictionMap LoadPredictions(const std::filesystem::path& path, const Ontology& ontology) {
  return ParsePredictions(ReadFile(path), ontology);
}

std::string SerializePredictions(const PredictionMap& predictions) {
  std::string out;
  for (const auto& [key, record] : predictions) {
    ordered_json obj;
    obj["dialogue_id"] = record.dialogue_id;
    obj["turn"] = record.turn;
    obj["belief"] = BeliefJson(record.belief);
    obj["action"] = ActsJson(record.action);
    out += obj.dump() + "\n";
  }
  return out;
}

PredictionMap PredictionsFromGold(const Corpus& corpus) {
  PredictionMap out;
  for (const auto& dialogue : corpus.dialogues) {
    for (const auto& turn : dialogue.turns) {
      out.emplace(PredictionKey{dialogue.id, turn.index},
                  PredictionRecord{dialogue.id, turn.index, turn.gold_belief, turn.gold_action});
    }
  }
  return out;
}

std::size_t CorruptBeliefs(PredictionMap& predictions, double rate, std::uint64_t seed,
                           const RestaurantDb& db) {
  // Distinct db values per slot, in sorted order.
  std::map<std::string, std::vector<Value>> values;
  for (const auto& entity : db.entities) {
    for (const auto& [slot, value] : entity) {
      auto& list = values[slot];
      if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
    }
  }
  for (auto& [slot, list] : values) std::sort(list.begin(), list.end());

  SplitMix64 rng(seed);
  std::size_t changed = 0;
  for (auto& [key, record] : predictions) {
    if (!rng.Chance(rate)) continue;
    BeliefState& belief = record.belief;
    if (belief.empty()) {
      const auto& foods = values["food"];
      belief.emplace("food", foods.empty() ? Value::Parse("unknown") : foods.front());
      ++changed;
      continue;
    }
    auto it = std::next(belief.begin(), static_cast<long>(rng.Below(belief.size())));
    std::vector<Value> alternatives;
    for (const auto& v : values[it->first]) {
      if (v != it->second) alternatives.push_back(v);
    }
    if (alternatives.empty()) {
      belief.erase(it);
    } else {
      it->second = alternatives[rng.Below(alternatives.size())];
    }
    ++changed;
  }
  return changed;
}

}  // namespace clinn
