#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clinn/match.hpp"
#include "clinn/ontology.hpp"
#include "clinn/rule_dsl.hpp"
#include "clinn/semilogic.hpp"

namespace clinn {

struct DialogueTurn {
  int index = 0;
  std::vector<ActItem> user_acts;
  BeliefState gold_belief;
  std::vector<ActItem> gold_action;
  std::optional<std::string> utterance;
};

struct Dialogue {
  std::string id;
  std::vector<DialogueTurn> turns;
};

struct Corpus {
  std::string domain = "restaurant";
  std::vector<Dialogue> dialogues;
};

// Stand-in for an external tracker's per-turn output.
struct PredictionRecord {
  std::string dialogue_id;
  int turn = 0;
  BeliefState belief;
  std::vector<ActItem> action;

  bool operator==(const PredictionRecord&) const = default;
};

using PredictionKey = std::pair<std::string, int>;
using PredictionMap = std::map<PredictionKey, PredictionRecord>;

Corpus ParseCorpus(std::string_view json_text, const Ontology& ontology);
Corpus LoadCorpus(const std::filesystem::path& path, const Ontology& ontology);
std::string SerializeCorpus(const Corpus& corpus);

// Seeded subsample of n dialogues: ids sorted, partial Fisher-Yates with
// SplitMix64(seed), first n kept, result re-sorted by id.
Corpus SampleCorpus(const Corpus& corpus, std::size_t n, std::uint64_t seed);

PredictionMap ParsePredictions(std::string_view jsonl_text, const Ontology& ontology);
PredictionMap LoadPredictions(const std::filesystem::path& path, const Ontology& ontology);
std::string SerializePredictions(const PredictionMap& predictions);

// Predictions equal to the gold annotations.
PredictionMap PredictionsFromGold(const Corpus& corpus);

// Replaces the belief of roughly `rate` of the records with a belief that
// differs from the original; returns how many records were changed.
std::size_t CorruptBeliefs(PredictionMap& predictions, double rate, std::uint64_t seed,
                           const RestaurantDb& db);

struct SyntheticData {
  Corpus corpus;
  RuleSet rules;
  std::string rules_text;
};

// Source of the rule set that reproduces every synthetic gold transition.
std::string_view SyntheticOracleRules();

SyntheticData GenSynthetic(std::size_t n, std::uint64_t seed, const RestaurantDb& db,
                           const Ontology& ontology);

}  // namespace clinn
