#include "livesurvey/document.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "livesurvey/error.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

using ojson = nlohmann::ordered_json;

const char* kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kText: return "text";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kInteger: return "integer";
  }
  return "text";
}

ColumnKind kind_from_name(const std::string& name, const std::string& where) {
  if (name == "text") return ColumnKind::kText;
  if (name == "categorical") return ColumnKind::kCategorical;
  if (name == "integer") return ColumnKind::kInteger;
  throw Error(ErrorKind::kParse, where + ": unknown column kind '" + name + "'");
}

std::string get_string(const nlohmann::json& j, const char* field,
                       const std::string& where, bool required = true) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    if (required) {
      throw Error(ErrorKind::kParse,
                  where + ": missing field '" + std::string(field) + "'");
    }
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  throw Error(ErrorKind::kParse,
              where + ": field '" + std::string(field) + "' must be a string");
}

std::optional<std::int64_t> as_integer(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    auto i = static_cast<std::int64_t>(d);
    if (static_cast<double>(i) == d) return i;
    return std::nullopt;
  }
  if (v.is_string()) {
    std::string s = normalize_whitespace(v.get<std::string>());
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) {
      return out;
    }
  }
  return std::nullopt;
}

Section section_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kParse, "section entries must be objects");
  }
  const std::string id = get_string(j, "id", "section");
  const std::string where = "section '" + id + "'";
  Section s;
  s.id = id;
  s.title = get_string(j, "title", where, false);
  s.non_maintained = j.value("non_maintained", false);
  const std::string text = get_string(j, "text", where, false);
  auto sentences = j.find("sentences");
  if (sentences != j.end() && !sentences->is_null()) {
    if (!sentences->is_array()) {
      throw Error(ErrorKind::kParse, where + ": 'sentences' must be an array");
    }
    std::uint64_t max_counter = 0;
    for (const auto& sj : *sentences) {
      Sentence sent{get_string(sj, "id", where), get_string(sj, "text", where)};
      if (sent.text.empty() || normalize_whitespace(sent.text) != sent.text) {
        throw Error(ErrorKind::kParse,
                    where + ": sentence '" + sent.id + "' has empty or "
                            "non-normalized text");
      }
      const std::string prefix = id + ":";
      if (sent.id.rfind(prefix, 0) != 0) {
        throw Error(ErrorKind::kParse, where + ": sentence id '" + sent.id +
                                           "' does not start with '" + prefix +
                                           "'");
      }
      std::uint64_t counter = 0;
      auto digits = std::string_view(sent.id).substr(prefix.size());
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), counter);
      if (ec != std::errc() || ptr != digits.data() + digits.size() ||
          counter == 0) {
        throw Error(ErrorKind::kParse,
                    where + ": malformed sentence id '" + sent.id + "'");
      }
      max_counter = std::max(max_counter, counter);
      s.sentences.push_back(std::move(sent));
    }
    if (s.text() != normalize_whitespace(text)) {
      throw Error(ErrorKind::kParse,
                  where + ": 'text' does not match the joined sentences");
    }
    s.next_sentence = j.value("next_sentence", max_counter + 1);
    if (s.next_sentence <= max_counter) {
      throw Error(ErrorKind::kParse,
                  where + ": next_sentence must exceed every sentence counter");
    }
  } else {
    s = make_section(id, s.title, text);
    s.non_maintained = j.value("non_maintained", false);
  }
  return s;
}

ColumnSpec column_from_json(const nlohmann::json& j, const std::string& where) {
  ColumnSpec c;
  c.name = get_string(j, "name", where);
  c.kind = kind_from_name(j.value("kind", std::string("text")), where);
  c.description = get_string(j, "description", where, false);
  if (c.kind == ColumnKind::kCategorical) {
    auto values = j.find("values");
    if (values == j.end() || !values->is_array() || values->empty()) {
      throw Error(ErrorKind::kParse, where + ": categorical column '" + c.name +
                                         "' needs a non-empty 'values' list");
    }
    for (const auto& v : *values) c.allowed.push_back(v.get<std::string>());
  } else if (c.kind == ColumnKind::kInteger) {
    if (!j.contains("min") || !j.contains("max")) {
      throw Error(ErrorKind::kParse, where + ": integer column '" + c.name +
                                         "' needs 'min' and 'max'");
    }
    c.min = j.at("min").get<std::int64_t>();
    c.max = j.at("max").get<std::int64_t>();
    if (c.min > c.max) {
      throw Error(ErrorKind::kParse,
                  where + ": column '" + c.name + "' has min > max");
    }
  }
  return c;
}

ojson column_to_json(const ColumnSpec& c) {
  ojson j;
  j["name"] = c.name;
  j["kind"] = kind_name(c.kind);
  if (c.kind == ColumnKind::kCategorical) j["values"] = c.allowed;
  if (c.kind == ColumnKind::kInteger) {
    j["min"] = c.min;
    j["max"] = c.max;
  }
  if (!c.description.empty()) j["description"] = c.description;
  return j;
}

SurveyTable table_from_json(const nlohmann::json& j) {
  SurveyTable t;
  t.id = get_string(j, "id", "table");
  const std::string where = "table '" + t.id + "'";
  t.title = get_string(j, "title", where, false);
  t.non_maintained = j.value("non_maintained", false);
  auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_array()) {
    throw Error(ErrorKind::kParse, where + ": missing 'schema' array");
  }
  for (const auto& c : *schema) t.schema.push_back(column_from_json(c, where));
  if (auto rows = j.find("rows"); rows != j.end() && !rows->is_null()) {
    if (!rows->is_array()) {
      throw Error(ErrorKind::kParse, where + ": 'rows' must be an array");
    }
    std::size_t index = 0;
    for (const auto& r : *rows) {
      try {
        t.rows.push_back(row_from_json(t, r));
      } catch (const Error& e) {
        throw Error(ErrorKind::kIntegrity, where + " row " +
                                               std::to_string(index) + ": " +
                                               e.what());
      }
      ++index;
    }
  }
  return t;
}

}  // namespace

std::string Section::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += s.text;
  }
  return out;
}

const Sentence* Section::find_sentence(std::string_view sentence_id) const {
  for (const auto& s : sentences) {
    if (s.id == sentence_id) return &s;
  }
  return nullptr;
}

std::string cell_to_string(const CellValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return std::to_string(std::get<std::int64_t>(value));
}

const Section* SurveyDocument::find_section(std::string_view id) const {
  for (const auto& s : sections) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Section* SurveyDocument::find_section(std::string_view id) {
  return const_cast<Section*>(std::as_const(*this).find_section(id));
}

const SurveyTable* SurveyDocument::find_table(std::string_view id) const {
  for (const auto& t : tables) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

SurveyTable* SurveyDocument::find_table(std::string_view id) {
  return const_cast<SurveyTable*>(std::as_const(*this).find_table(id));
}

const Reference* SurveyDocument::find_reference(std::string_view key) const {
  for (const auto& r : references) {
    if (r.key == key) return &r;
  }
  return nullptr;
}

Section make_section(std::string id, std::string title, std::string_view text) {
  Section s;
  s.id = std::move(id);
  s.title = std::move(title);
  for (auto& sentence : segment_sentences(text)) {
    s.sentences.push_back(
        {s.id + ":" + std::to_string(s.next_sentence++), std::move(sentence)});
  }
  return s;
}

TableRow row_from_json(const SurveyTable& table, const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kSchema, "table row must be a JSON object");
  }
  TableRow row;
  for (const auto& [name, value] : j.items()) {
    auto col = std::find_if(table.schema.begin(), table.schema.end(),
                            [&](const ColumnSpec& c) { return c.name == name; });
    if (col == table.schema.end()) {
      throw Error(ErrorKind::kSchema, "unknown column '" + name + "'");
    }
    if (col->kind == ColumnKind::kInteger) {
      auto i = as_integer(value);
      if (!i) {
        throw Error(ErrorKind::kSchema,
                    "column '" + name + "' expects an integer, got " +
                        value.dump());
      }
      row.emplace(name, *i);
    } else if (value.is_string()) {
      row.emplace(name, normalize_whitespace(value.get<std::string>()));
    } else if (value.is_number() || value.is_boolean()) {
      row.emplace(name, value.dump());
    } else {
      throw Error(ErrorKind::kSchema, "column '" + name +
                                          "' expects a scalar, got " +
                                          value.dump());
    }
  }
  validate_row(table, row);
  return row;
}

ojson row_to_json(const SurveyTable& table, const TableRow& row) {
  ojson j = ojson::object();
  for (const auto& col : table.schema) {
    auto it = row.find(col.name);
    if (it == row.end()) continue;
    if (const auto* i = std::get_if<std::int64_t>(&it->second)) {
      j[col.name] = *i;
    } else {
      j[col.name] = std::get<std::string>(it->second);
    }
  }
  return j;
}

void validate_row(const SurveyTable& table, const TableRow& row) {
  if (row.size() != table.schema.size()) {
    for (const auto& col : table.schema) {
      if (!row.count(col.name)) {
        throw Error(ErrorKind::kSchema, "missing column '" + col.name + "'");
      }
    }
  }
  for (const auto& col : table.schema) {
    auto it = row.find(col.name);
    if (it == row.end()) {
      throw Error(ErrorKind::kSchema, "missing column '" + col.name + "'");
    }
    const CellValue& v = it->second;
    switch (col.kind) {
      case ColumnKind::kText:
        if (!std::holds_alternative<std::string>(v)) {
          throw Error(ErrorKind::kSchema,
                      "column '" + col.name + "' expects text");
        }
        break;
      case ColumnKind::kCategorical: {
        const auto* s = std::get_if<std::string>(&v);
        if (!s || std::find(col.allowed.begin(), col.allowed.end(), *s) ==
                      col.allowed.end()) {
          throw Error(ErrorKind::kSchema, "column '" + col.name + "' value '" +
                                              cell_to_string(v) +
                                              "' is not an allowed category");
        }
        break;
      }
      case ColumnKind::kInteger: {
        const auto* i = std::get_if<std::int64_t>(&v);
        if (!i || *i < col.min || *i > col.max) {
          throw Error(ErrorKind::kSchema,
                      "column '" + col.name + "' value " + cell_to_string(v) +
                          " is outside [" + std::to_string(col.min) + ", " +
                          std::to_string(col.max) + "]");
        }
        break;
      }
    }
  }
  if (row.size() != table.schema.size()) {
    throw Error(ErrorKind::kSchema, "row has columns outside the schema");
  }
}

void validate_document(const SurveyDocument& doc) {
  std::set<std::string> section_ids;
  for (const auto& s : doc.sections) {
    if (!section_ids.insert(s.id).second) {
      throw Error(ErrorKind::kIntegrity, "duplicate section id '" + s.id + "'");
    }
    std::set<std::string> sentence_ids;
    for (const auto& sent : s.sentences) {
      if (!sentence_ids.insert(sent.id).second) {
        throw Error(ErrorKind::kIntegrity,
                    "duplicate sentence id '" + sent.id + "'");
      }
    }
  }
  std::set<std::string> table_ids;
  for (const auto& t : doc.tables) {
    if (!table_ids.insert(t.id).second) {
      throw Error(ErrorKind::kIntegrity, "duplicate table id '" + t.id + "'");
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      try {
        validate_row(t, t.rows[i]);
      } catch (const Error& e) {
        throw Error(ErrorKind::kIntegrity, "table '" + t.id + "' row " +
                                               std::to_string(i) + ": " +
                                               e.what());
      }
    }
  }
  std::set<std::string> keys;
  for (std::size_t i = 0; i < doc.references.size(); ++i) {
    const auto& r = doc.references[i];
    if (r.key.empty() || !keys.insert(r.key).second) {
      throw Error(ErrorKind::kIntegrity,
                  "duplicate or empty reference key '" + r.key + "'");
    }
    if (r.number != i + 1) {
      throw Error(ErrorKind::kIntegrity,
                  "reference '" + r.key + "' has number " +
                      std::to_string(r.number) + ", expected " +
                      std::to_string(i + 1));
    }
  }
}

SurveyDocument document_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kParse, "survey document must be a JSON object");
  }
  SurveyDocument doc;
  if (auto m = j.find("metadata"); m != j.end() && m->is_object()) {
    doc.metadata.title = get_string(*m, "title", "metadata", false);
    doc.metadata.abstract = get_string(*m, "abstract", "metadata", false);
    if (auto k = m->find("keywords"); k != m->end() && k->is_array()) {
      for (const auto& v : *k) doc.metadata.keywords.push_back(v.get<std::string>());
    }
  }
  auto array_field = [&](const char* name) -> const nlohmann::json* {
    auto it = j.find(name);
    if (it == j.end() || it->is_null()) return nullptr;
    if (!it->is_array()) {
      throw Error(ErrorKind::kParse, std::string("'") + name +
                                         "' must be an array");
    }
    return &*it;
  };
  if (const auto* sections = array_field("sections")) {
    for (const auto& s : *sections) doc.sections.push_back(section_from_json(s));
  }
  if (const auto* tables = array_field("tables")) {
    for (const auto& t : *tables) doc.tables.push_back(table_from_json(t));
  }
  if (const auto* refs = array_field("references")) {
    for (const auto& r : *refs) {
      Reference ref;
      ref.key = get_string(r, "key", "reference");
      const std::string where = "reference '" + ref.key + "'";
      if (!r.contains("number") || !r.at("number").is_number_unsigned()) {
        throw Error(ErrorKind::kParse, where + ": missing positive 'number'");
      }
      ref.number = r.at("number").get<std::uint64_t>();
      if (auto bib = r.find("bib"); bib != r.end() && bib->is_object()) {
        for (const auto& [name, value] : bib->items()) {
          if (name == "key") continue;
          ref.bib_fields.emplace(
              name, value.is_string() ? value.get<std::string>() : value.dump());
        }
      }
      doc.references.push_back(std::move(ref));
    }
  }
  validate_document(doc);
  return doc;
}

SurveyDocument parse_document(std::string_view raw) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse,
                std::string("survey document is not valid JSON: ") + e.what());
  }
  return document_from_json(j);
}

ojson document_to_json(const SurveyDocument& doc) {
  ojson j;
  j["metadata"]["title"] = doc.metadata.title;
  j["metadata"]["keywords"] = doc.metadata.keywords;
  j["metadata"]["abstract"] = doc.metadata.abstract;
  j["sections"] = ojson::array();
  for (const auto& s : doc.sections) {
    ojson sj;
    sj["id"] = s.id;
    sj["title"] = s.title;
    sj["text"] = s.text();
    sj["sentences"] = ojson::array();
    for (const auto& sent : s.sentences) {
      sj["sentences"].push_back(ojson{{"id", sent.id}, {"text", sent.text}});
    }
    sj["next_sentence"] = s.next_sentence;
    if (s.non_maintained) sj["non_maintained"] = true;
    j["sections"].push_back(std::move(sj));
  }
  j["tables"] = ojson::array();
  for (const auto& t : doc.tables) {
    ojson tj;
    tj["id"] = t.id;
    tj["title"] = t.title;
    tj["schema"] = ojson::array();
    for (const auto& c : t.schema) tj["schema"].push_back(column_to_json(c));
    tj["rows"] = ojson::array();
    for (const auto& r : t.rows) tj["rows"].push_back(row_to_json(t, r));
    if (t.non_maintained) tj["non_maintained"] = true;
    j["tables"].push_back(std::move(tj));
  }
  j["references"] = ojson::array();
  for (const auto& r : doc.references) {
    ojson rj;
    rj["key"] = r.key;
    rj["number"] = r.number;
    rj["bib"] = ojson::object();
    for (const auto& [name, value] : r.bib_fields) rj["bib"][name] = value;
    j["references"].push_back(std::move(rj));
  }
  return j;
}

std::string serialize_document(const SurveyDocument& doc) {
  return document_to_json(doc).dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

SurveyDocument load_document(const std::filesystem::path& path) {
  return parse_document(read_file(path));
}

}  // namespace livesurvey
