#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace clinn {

// Slot ontology and dialogue-act catalogue for one domain.
//
// `slots` are the informable slots that may appear in a belief state.
// `request_slots` are extra slot names that only appear inside slot-only act
// items, e.g. request(address).
struct Ontology {
  std::string domain;
  std::vector<std::string> slots;
  std::vector<std::string> db_slots;
  std::vector<std::string> acts;
  std::vector<std::string> request_slots;

  bool HasSlot(std::string_view slot) const;
  bool HasAct(std::string_view act) const;
  // Slot allowed in an act item; `with_value` restricts to belief slots.
  bool HasActSlot(std::string_view slot, bool with_value) const;

  static Ontology RestaurantDefault();
};

Ontology ParseOntology(std::string_view json_text);
Ontology LoadOntology(const std::filesystem::path& path);

// Reads a whole file; throws Error(kFileNotFound) when it cannot be opened.
std::string ReadFile(const std::filesystem::path& path);

}  // namespace clinn
