#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "livesurvey/agents.hpp"
#include "livesurvey/corpus.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/outline.hpp"

namespace livesurvey {

enum class UpdateDecision { kAbstained, kUpdated, kFailed };
const char* to_string(UpdateDecision decision);

/// Audit of one update step. Together with the document it was applied to,
/// a record fully determines the resulting document (see replay_update).
struct UpdateRecord {
  std::string paper_id;
  std::string epoch_id;
  UpdateDecision decision = UpdateDecision::kFailed;
  std::optional<PaperSummary> summary;
  bool parse_abstain = false;

  std::vector<std::string> ranked_sections;
  std::optional<std::string> routed_section;
  std::optional<std::string> routed_table;
  std::vector<std::pair<std::string, std::string>> table_answers;
  std::optional<std::string> insertion_sentence_id;
  bool insertion_fallback = false;

  std::vector<std::string> inserted_sentence_ids;
  std::vector<std::string> inserted_sentence_texts;
  std::string draft_text;
  std::string final_text;
  std::optional<TableRow> inserted_row;
  std::vector<std::string> resolved_citation_keys;
  std::optional<Reference> new_reference;
  std::size_t placeholder_count = 0;

  std::vector<std::string> flags;
  std::string table_error;
  std::string error;
  std::string error_kind;

  std::size_t delta_tokens = 0;
  std::size_t delta_out = 0;

  std::string started_at;
  std::string finished_at;

  bool has_flag(std::string_view flag) const;
};

namespace flags {
inline constexpr std::string_view kNoPlaceholder = "no-citation-placeholder";
inline constexpr std::string_view kInsertionFallback = "insertion-fallback";
inline constexpr std::string_view kParseAbstain = "parse-abstain";
inline constexpr std::string_view kTableFailed = "table-synthesis-failed";
}  // namespace flags

nlohmann::ordered_json record_to_json(const UpdateRecord& record);
UpdateRecord record_from_json(const nlohmann::json& j);

using Clock = std::function<std::string()>;

/// Current UTC time as an ISO-8601 string with second precision.
std::string utc_now();

struct UpdateContext {
  TextGenerator& generator;
  Clock clock = utc_now;
};

struct UpdateResult {
  SurveyState state;
  UpdateRecord record;
};

/// One step of the dynamic update loop for one paper. Requires an approved
/// outline (Error(kPrecondition) otherwise). Agent failures never escape:
/// the step is recorded as failed and the state is returned unchanged.
UpdateResult apply_update(const SurveyState& state, const PaperRecord& paper,
                          const UpdateContext& ctx);

/// Splices the sentences of `paragraph` after sentence `after` (or at the
/// end for "append"), giving them fresh ids. Existing sentences are
/// untouched. Throws Error(kPrecondition) for an unknown `after`.
Section insert_paragraph(const Section& section, std::string_view after,
                         std::string_view paragraph,
                         std::vector<std::string>* inserted_ids = nullptr);

struct CitationResolution {
  std::string text;
  std::vector<Reference> references;
  std::vector<std::string> keys;           // key per placeholder, in order
  std::optional<Reference> new_reference;  // set when only one entry was added
  std::size_t added = 0;
};

/// Replaces every "[cite]" with "[n]". A single bib entry resolves every
/// placeholder; otherwise placeholders map to entries positionally. Known
/// keys reuse their number, new keys are appended as max + 1.
CitationResolution resolve_citations(std::string_view draft,
                                     const std::vector<BibEntry>& bib_entries,
                                     const SurveyDocument& doc);

/// Writes the canonical serialization of the state's document.
void publish(const SurveyState& state, const std::filesystem::path& out);

/// Appends one record as a single JSON line.
void append_audit(const std::filesystem::path& log, const UpdateRecord& record);
std::vector<UpdateRecord> read_audit(const std::filesystem::path& log);

/// Rebuilds the post-update document from the pre-update document and a
/// record. Throws Error(kIntegrity) if the record does not fit.
SurveyDocument replay_update(const SurveyDocument& before,
                             const UpdateRecord& record);

}  // namespace livesurvey
