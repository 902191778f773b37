#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "livesurvey/corpus.hpp"

namespace livesurvey {

struct Sentence {
  std::string id;  // "{section_id}:{counter}"
  std::string text;

  bool operator==(const Sentence&) const = default;
};

struct Section {
  std::string id;
  std::string title;
  std::vector<Sentence> sentences;
  bool non_maintained = false;
  // Next counter handed out to an inserted sentence; never reused.
  std::uint64_t next_sentence = 1;

  std::string text() const;
  const Sentence* find_sentence(std::string_view sentence_id) const;

  bool operator==(const Section&) const = default;
};

enum class ColumnKind { kText, kCategorical, kInteger };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kText;
  std::vector<std::string> allowed;  // categorical only
  std::int64_t min = 0;              // integer only
  std::int64_t max = 0;              // integer only
  std::string description;           // optional prompt hint

  bool operator==(const ColumnSpec&) const = default;
};

using CellValue = std::variant<std::string, std::int64_t>;
using TableRow = std::map<std::string, CellValue>;

std::string cell_to_string(const CellValue& value);

struct SurveyTable {
  std::string id;
  std::string title;
  std::vector<ColumnSpec> schema;
  std::vector<TableRow> rows;
  bool non_maintained = false;

  bool operator==(const SurveyTable&) const = default;
};

struct Reference {
  std::string key;
  std::map<std::string, std::string> bib_fields;
  std::uint64_t number = 0;

  bool operator==(const Reference&) const = default;
};

struct DocumentMetadata {
  std::string title;
  std::vector<std::string> keywords;
  std::string abstract;

  bool operator==(const DocumentMetadata&) const = default;
};

/// Survey content: sections, tables and references. Treated as an immutable
/// snapshot; updates build a new value.
struct SurveyDocument {
  DocumentMetadata metadata;
  std::vector<Section> sections;
  std::vector<SurveyTable> tables;
  std::vector<Reference> references;

  const Section* find_section(std::string_view id) const;
  Section* find_section(std::string_view id);
  const SurveyTable* find_table(std::string_view id) const;
  SurveyTable* find_table(std::string_view id);
  const Reference* find_reference(std::string_view key) const;

  bool operator==(const SurveyDocument&) const = default;
};

/// Throws Error(kSchema) when the row does not match the table schema.
void validate_row(const SurveyTable& table, const TableRow& row);

/// Throws Error(kIntegrity) when ids collide, reference numbering is not
/// dense 1..n in list order, or a row violates its schema.
void validate_document(const SurveyDocument& doc);

/// Parses the canonical survey-document JSON. Section bodies are given as
/// `text` (segmented on load) or, in normalized files, as an explicit
/// `sentences` array whose joined text must equal `text`.
SurveyDocument parse_document(std::string_view raw);
SurveyDocument document_from_json(const nlohmann::json& j);

/// Canonical, deterministic serialization (two-space indented JSON, fixed
/// key order, trailing newline).
std::string serialize_document(const SurveyDocument& doc);
nlohmann::ordered_json document_to_json(const SurveyDocument& doc);

SurveyDocument load_document(const std::filesystem::path& path);

/// Builds a section from raw text, numbering sentences from 1.
Section make_section(std::string id, std::string title, std::string_view text);

TableRow row_from_json(const SurveyTable& table, const nlohmann::json& j);
nlohmann::ordered_json row_to_json(const SurveyTable& table,
                                   const TableRow& row);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace livesurvey
