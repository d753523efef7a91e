#include "clinn/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clinn/error.hpp"

namespace clinn {
namespace {

bool Contains(const std::vector<std::string>& names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> StringList(const nlohmann::json& doc, const char* key,
                                    bool required) {
  std::vector<std::string> out;
  if (!doc.contains(key)) {
    if (required) {
      throw Error(ErrorKind::kSchema, std::string("ontology: missing key '") + key + "'");
    }
    return out;
  }
  const auto& list = doc.at(key);
  if (!list.is_array()) {
    throw Error(ErrorKind::kSchema, std::string("ontology: '") + key + "' must be an array");
  }
  for (const auto& entry : list) {
    if (!entry.is_string()) {
      throw Error(ErrorKind::kSchema,
                  std::string("ontology: '") + key + "' entries must be strings");
    }
    std::string name = entry.get<std::string>();
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(std::move(name));
  }
  return out;
}

}  // namespace

bool Ontology::HasSlot(std::string_view slot) const { return Contains(slots, slot); }

bool Ontology::HasAct(std::string_view act) const { return Contains(acts, act); }

bool Ontology::HasActSlot(std::string_view slot, bool with_value) const {
  if (HasSlot(slot)) return true;
  return !with_value && Contains(request_slots, slot);
}

Ontology Ontology::RestaurantDefault() {
  Ontology onto;
  onto.domain = "restaurant";
  onto.slots = {"food", "area", "pricerange", "name", "day", "time", "people"};
  onto.db_slots = {"food", "area", "pricerange", "name"};
  onto.acts = {"inform",      "request",     "nooffer",      "recommend",
               "select",      "offerbook",   "offerbooked",  "nobook",
               "bye",         "greet",       "reqmore",      "welcome",
               "getrecommend", "acceptance", "rejection",    "alternatives"};
  onto.request_slots = {"address", "phone", "postcode", "price", "reference"};
  return onto;
}

Ontology ParseOntology(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("ontology: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kSchema, "ontology: expected an object");

  Ontology onto;
  onto.domain = doc.value("domain", std::string("restaurant"));
  onto.slots = StringList(doc, "slots", true);
  onto.db_slots = StringList(doc, "db_slots", false);
  onto.acts = StringList(doc, "acts", true);
  if (doc.contains("request_slots")) {
    onto.request_slots = StringList(doc, "request_slots", false);
  } else {
    onto.request_slots = Ontology::RestaurantDefault().request_slots;
  }
  if (onto.slots.empty()) throw Error(ErrorKind::kEmptyOntology, "ontology: no slots");
  for (const auto& slot : onto.db_slots) {
    if (!onto.HasSlot(slot)) {
      throw Error(ErrorKind::kSchema, "ontology: db slot '" + slot + "' is not a slot");
    }
  }
  return onto;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kFileNotFound, "cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Ontology LoadOntology(const std::filesystem::path& path) {
  return ParseOntology(ReadFile(path));
}

}  // namespace clinn
