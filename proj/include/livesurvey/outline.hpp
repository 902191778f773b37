#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "livesurvey/corpus.hpp"
#include "livesurvey/document.hpp"

namespace livesurvey {

struct SectionEntry {
  std::string id;
  std::string section_title;
  std::string page_numbers;  // stored verbatim, never interpreted
  std::vector<int> table_relevant;
  std::string summary;

  bool operator==(const SectionEntry&) const = default;
};

struct TableEntry {
  std::string id;
  std::string title;
  std::string page_numbers;
  std::string summary;

  bool operator==(const TableEntry&) const = default;
};

/// The frozen structure of a survey. Automated updates only read it.
struct StructuredOutline {
  SurveyScope scope;
  std::vector<SectionEntry> section_entries;
  std::vector<TableEntry> table_entries;
  bool approved = false;

  const SectionEntry* find_section(std::string_view id) const;
  const TableEntry* find_table(std::string_view id) const;

  bool operator==(const StructuredOutline&) const = default;
};

/// Marks the outline as reviewed. Approving an approved outline is a no-op.
StructuredOutline approve_outline(StructuredOutline outline);

/// Checks per-entry invariants (table_relevant length, flag values, unique
/// ids). Throws Error(kIntegrity).
void validate_outline(const StructuredOutline& outline);

/// Every document section/table is either in the outline or flagged
/// non_maintained, and every outline entry exists in the document.
void check_outline_matches(const StructuredOutline& outline,
                           const SurveyDocument& doc);

StructuredOutline parse_outline(std::string_view raw);
StructuredOutline outline_from_json(const nlohmann::json& j);
nlohmann::ordered_json outline_to_json(const StructuredOutline& outline);
std::string serialize_outline(const StructuredOutline& outline);
StructuredOutline load_outline(const std::filesystem::path& path);

/// FNV-1a over the canonical serialization.
std::uint64_t outline_hash(const StructuredOutline& outline);
std::uint64_t fnv1a64(std::string_view data);

/// A survey at one point of its maintenance epoch: mutable content plus a
/// shared, read-only outline.
class SurveyState {
 public:
  /// Starts a maintenance epoch. Requires an outline consistent with the
  /// document; approval is checked when an update runs.
  SurveyState(SurveyDocument document, StructuredOutline outline,
              std::string epoch_id);

  const SurveyDocument& document() const { return document_; }
  const StructuredOutline& outline() const { return *outline_; }
  const std::string& epoch_id() const { return epoch_id_; }

  /// Same epoch and outline, new content.
  SurveyState with_document(SurveyDocument document) const;

  /// Human-led structural reset: replaces the outline and opens a new epoch.
  SurveyState start_new_epoch(StructuredOutline outline,
                              std::string epoch_id) const;

 private:
  SurveyState(SurveyDocument document,
              std::shared_ptr<const StructuredOutline> outline,
              std::string epoch_id);

  SurveyDocument document_;
  std::shared_ptr<const StructuredOutline> outline_;
  std::string epoch_id_;
};

}  // namespace livesurvey
