#include "clinn/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "clinn/error.hpp"
#include "clinn/ontology.hpp"

namespace clinn {
namespace {

// JSON string literal via nlohmann's escaping.
std::string Quote(std::string_view text) { return nlohmann::json(std::string(text)).dump(); }

double Fraction(const nlohmann::json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_number()) {
    throw Error(ErrorKind::kSchema, std::string("report: missing numeric '") + key + "'");
  }
  double value = it->get<double>();
  if (value < 0.0 || value > 1.0) {
    throw Error(ErrorKind::kSchema, std::string("report: '") + key + "' outside [0,1]");
  }
  return value;
}

}  // namespace

bool IsMetricName(std::string_view name) {
  return name == "action_f1" || name == "joint_goal" || name == "slot_acc" || name == "slot_f1";
}

double EvalReport::Metric(std::string_view name) const {
  if (name == "action_f1") return action_f1;
  if (name == "joint_goal") return joint_goal;
  if (name == "slot_acc") return slot_accuracy;
  if (name == "slot_f1") return slot_f1;
  throw Error(ErrorKind::kSchema, "unknown metric '" + std::string(name) + "'");
}

std::string SerializeReport(const EvalReport& report) {
  std::string out = "{\n";
  out += fmt::format("  \"label\": {},\n", Quote(report.label));
  out += fmt::format("  \"seed_label\": {},\n",
                     report.seed_label ? Quote(*report.seed_label) : "null");
  out += fmt::format("  \"action_f1\": {:.6f},\n", report.action_f1);
  out += fmt::format("  \"joint_goal\": {:.6f},\n", report.joint_goal);
  out += fmt::format("  \"slot_accuracy\": {:.6f},\n", report.slot_accuracy);
  out += fmt::format("  \"slot_f1\": {:.6f},\n", report.slot_f1);
  out += fmt::format("  \"dialogue_count\": {},\n", report.dialogue_count);
  out += fmt::format("  \"turn_count\": {},\n", report.turn_count);
  out += fmt::format("  \"slot_count\": {},\n", report.slot_count);
  out += "  \"turns\": [";
  for (std::size_t i = 0; i < report.turns.size(); ++i) {
    const TurnDetail& t = report.turns[i];
    std::vector<std::string> fired;
    for (const auto& id : t.fired_rules) fired.push_back(Quote(id));
    out += i == 0 ? "\n" : ",\n";
    out += fmt::format(
        "    {{\"dialogue_id\": {}, \"turn\": {}, \"belief_source\": {}, "
        "\"action_source\": {}, \"fired_rules\": [{}], \"joint_correct\": {}, "
        "\"correct_slots\": {}}}",
        Quote(t.dialogue_id), t.turn, Quote(t.belief_source), Quote(t.action_source),
        fmt::join(fired, ", "), t.joint_correct, t.correct_slots);
  }
  out += report.turns.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

EvalReport ParseReport(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("report: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "report: expected an object");
  EvalReport report;
  try {
    report.label = doc.value("label", std::string());
    if (doc.contains("seed_label") && doc.at("seed_label").is_string()) {
      report.seed_label = doc.at("seed_label").get<std::string>();
    }
    report.action_f1 = Fraction(doc, "action_f1");
    report.joint_goal = Fraction(doc, "joint_goal");
    report.slot_accuracy = Fraction(doc, "slot_accuracy");
    report.slot_f1 = Fraction(doc, "slot_f1");
    report.dialogue_count = doc.value("dialogue_count", std::size_t{0});
    report.turn_count = doc.value("turn_count", std::size_t{0});
    report.slot_count = doc.value("slot_count", std::size_t{0});
    for (const auto& t : doc.value("turns", nlohmann::json::array())) {
      TurnDetail detail;
      detail.dialogue_id = t.at("dialogue_id").get<std::string>();
      detail.turn = t.at("turn").get<int>();
      detail.belief_source = t.at("belief_source").get<std::string>();
      detail.action_source = t.at("action_source").get<std::string>();
      detail.fired_rules = t.at("fired_rules").get<std::vector<std::string>>();
      detail.joint_correct = t.at("joint_correct").get<bool>();
      detail.correct_slots = t.at("correct_slots").get<std::size_t>();
      report.turns.push_back(std::move(detail));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("report: ") + e.what());
  }
  return report;
}

EvalReport LoadReport(const std::filesystem::path& path) {
  return ParseReport(ReadFile(path));
}

}  // namespace clinn
