#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clinn {

struct TurnDetail {
  std::string dialogue_id;
  int turn = 0;
  std::string belief_source;
  std::string action_source;
  std::vector<std::string> fired_rules;
  bool joint_correct = false;
  std::size_t correct_slots = 0;
};

// Metrics for one run. All four metrics are fractions in [0, 1].
struct EvalReport {
  std::string label;
  std::optional<std::string> seed_label;
  double action_f1 = 0.0;
  double joint_goal = 0.0;
  double slot_accuracy = 0.0;
  double slot_f1 = 0.0;
  std::size_t dialogue_count = 0;
  std::size_t turn_count = 0;
  std::size_t slot_count = 0;
  std::vector<TurnDetail> turns;

  // Metric by its CLI name: action_f1, joint_goal, slot_acc or slot_f1.
  double Metric(std::string_view name) const;
};

bool IsMetricName(std::string_view name);

// Fixed key order and six-decimal metrics, so identical reports serialize to
// identical bytes.
std::string SerializeReport(const EvalReport& report);
EvalReport ParseReport(std::string_view json_text);
EvalReport LoadReport(const std::filesystem::path& path);

}  // namespace clinn
