#include "livesurvey/outline.hpp"

#include <set>

#include "livesurvey/error.hpp"

namespace livesurvey {
namespace {

using ojson = nlohmann::ordered_json;

// Outline ids may be written as numbers ("id": 2) or strings.
std::string id_string(const nlohmann::json& j, const std::string& where) {
  auto it = j.find("id");
  if (it == j.end()) throw Error(ErrorKind::kParse, where + ": missing 'id'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw Error(ErrorKind::kParse, where + ": 'id' must be a string or number");
}

std::string text_field(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return {};
  return it->is_string() ? it->get<std::string>() : it->dump();
}

}  // namespace

const SectionEntry* StructuredOutline::find_section(std::string_view id) const {
  for (const auto& e : section_entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

const TableEntry* StructuredOutline::find_table(std::string_view id) const {
  for (const auto& e : table_entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

StructuredOutline approve_outline(StructuredOutline outline) {
  outline.approved = true;
  return outline;
}

void validate_outline(const StructuredOutline& outline) {
  std::set<std::string> ids;
  for (const auto& e : outline.section_entries) {
    if (!ids.insert("s/" + e.id).second) {
      throw Error(ErrorKind::kIntegrity,
                  "duplicate outline section id '" + e.id + "'");
    }
    if (e.table_relevant.size() != outline.table_entries.size()) {
      throw Error(ErrorKind::kIntegrity,
                  "outline section '" + e.id + "': table_relevant has " +
                      std::to_string(e.table_relevant.size()) +
                      " flags for " +
                      std::to_string(outline.table_entries.size()) + " tables");
    }
    for (int flag : e.table_relevant) {
      if (flag != 0 && flag != 1) {
        throw Error(ErrorKind::kIntegrity, "outline section '" + e.id +
                                               "': table_relevant flags "
                                               "must be 0 or 1");
      }
    }
  }
  for (const auto& e : outline.table_entries) {
    if (!ids.insert("t/" + e.id).second) {
      throw Error(ErrorKind::kIntegrity,
                  "duplicate outline table id '" + e.id + "'");
    }
  }
}

void check_outline_matches(const StructuredOutline& outline,
                           const SurveyDocument& doc) {
  for (const auto& e : outline.section_entries) {
    if (!doc.find_section(e.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "outline section '" + e.id + "' is not in the document");
    }
  }
  for (const auto& e : outline.table_entries) {
    if (!doc.find_table(e.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "outline table '" + e.id + "' is not in the document");
    }
  }
  for (const auto& s : doc.sections) {
    if (!s.non_maintained && !outline.find_section(s.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "document section '" + s.id +
                      "' is neither in the outline nor non_maintained");
    }
  }
  for (const auto& t : doc.tables) {
    if (!t.non_maintained && !outline.find_table(t.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "document table '" + t.id +
                      "' is neither in the outline nor non_maintained");
    }
  }
}

StructuredOutline outline_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kParse, "outline must be a JSON object");
  }
  StructuredOutline o;
  o.approved = j.value("approved", false);
  if (auto scope = j.find("scope"); scope != j.end() && !scope->is_null()) {
    o.scope = scope_from_json(*scope);
  }
  if (auto sections = j.find("sections"); sections != j.end()) {
    for (const auto& sj : *sections) {
      SectionEntry e;
      e.id = id_string(sj, "outline section");
      e.section_title = text_field(sj, "section_title");
      e.page_numbers = text_field(sj, "page_numbers");
      e.summary = text_field(sj, "summary");
      if (auto flags = sj.find("table_relevant"); flags != sj.end()) {
        for (const auto& f : *flags) {
          if (!f.is_number_integer()) {
            throw Error(ErrorKind::kParse, "outline section '" + e.id +
                                               "': table_relevant must hold "
                                               "integers");
          }
          e.table_relevant.push_back(f.get<int>());
        }
      }
      o.section_entries.push_back(std::move(e));
    }
  }
  if (auto tables = j.find("tables"); tables != j.end()) {
    for (const auto& tj : *tables) {
      TableEntry e;
      e.id = id_string(tj, "outline table");
      e.title = text_field(tj, "title");
      e.page_numbers = text_field(tj, "page_numbers");
      e.summary = text_field(tj, "summary");
      o.table_entries.push_back(std::move(e));
    }
  }
  validate_outline(o);
  return o;
}

StructuredOutline parse_outline(std::string_view raw) {
  try {
    return outline_from_json(nlohmann::json::parse(raw));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("invalid outline: ") + e.what());
  }
}

ojson outline_to_json(const StructuredOutline& outline) {
  ojson j;
  j["approved"] = outline.approved;
  j["scope"] = scope_to_json(outline.scope);
  j["sections"] = ojson::array();
  for (const auto& e : outline.section_entries) {
    ojson ej;
    ej["id"] = e.id;
    ej["section_title"] = e.section_title;
    ej["page_numbers"] = e.page_numbers;
    ej["table_relevant"] = e.table_relevant;
    ej["summary"] = e.summary;
    j["sections"].push_back(std::move(ej));
  }
  j["tables"] = ojson::array();
  for (const auto& e : outline.table_entries) {
    ojson ej;
    ej["id"] = e.id;
    ej["title"] = e.title;
    ej["page_numbers"] = e.page_numbers;
    ej["summary"] = e.summary;
    j["tables"].push_back(std::move(ej));
  }
  return j;
}

std::string serialize_outline(const StructuredOutline& outline) {
  return outline_to_json(outline).dump(2) + "\n";
}

StructuredOutline load_outline(const std::filesystem::path& path) {
  return parse_outline(read_file(path));
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t outline_hash(const StructuredOutline& outline) {
  return fnv1a64(serialize_outline(outline));
}

SurveyState::SurveyState(SurveyDocument document, StructuredOutline outline,
                         std::string epoch_id)
    : SurveyState(std::move(document),
                  std::make_shared<const StructuredOutline>(std::move(outline)),
                  std::move(epoch_id)) {}

SurveyState::SurveyState(SurveyDocument document,
                         std::shared_ptr<const StructuredOutline> outline,
                         std::string epoch_id)
    : document_(std::move(document)),
      outline_(std::move(outline)),
      epoch_id_(std::move(epoch_id)) {
  validate_document(document_);
  validate_outline(*outline_);
  check_outline_matches(*outline_, document_);
}

SurveyState SurveyState::with_document(SurveyDocument document) const {
  return SurveyState(std::move(document), outline_, epoch_id_);
}

SurveyState SurveyState::start_new_epoch(StructuredOutline outline,
                                         std::string epoch_id) const {
  return SurveyState(document_, std::move(outline), std::move(epoch_id));
}

}  // namespace livesurvey
