#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace livesurvey {

/// A bibliographic record: citation key plus free-form fields
/// (title, author, year, venue, ...).
struct BibEntry {
  std::string key;
  std::map<std::string, std::string> fields;

  bool operator==(const BibEntry&) const = default;
};

struct PaperRecord {
  std::string id;
  std::string title;
  std::string abstract;
  std::string full_text;
  std::string venue;
  std::string date;  // YYYY-MM-DD
  std::vector<std::string> categories;
  BibEntry bib;

  bool operator==(const PaperRecord&) const = default;
};

/// Methods / Novelty / Results representation produced by the analysis
/// agent. Survey-agnostic by construction.
struct PaperSummary {
  std::string methods;
  std::string novelty;
  std::string results;
  std::string source_paper_id;

  bool valid() const {
    return !methods.empty() && !novelty.empty() && !results.empty();
  }
  /// Headed text form handed to downstream prompts.
  std::string render() const;

  bool operator==(const PaperSummary&) const = default;
};

/// Author-defined inclusion boundary of a survey.
struct SurveyScope {
  std::string title;
  std::vector<std::string> keywords;
  std::string abstract;
  std::string core_criterion;

  bool operator==(const SurveyScope&) const = default;
};

/// Coarse candidate filter. Empty category/venue lists accept anything.
struct CandidateFilter {
  std::vector<std::string> allowed_categories;
  std::vector<std::string> allowed_venues;
  std::optional<std::string> date_start;  // inclusive, YYYY-MM-DD
  std::optional<std::string> date_end;    // inclusive, YYYY-MM-DD
  bool require_peer_reviewed = false;

  bool accepts(const PaperRecord& paper) const;
  void validate() const;
};

inline constexpr std::string_view kPreprintVenue = "preprint";

/// True when `date` is a valid calendar date written as YYYY-MM-DD.
bool is_iso_date(std::string_view date);

BibEntry bib_from_json(const nlohmann::json& j);
nlohmann::ordered_json bib_to_json(const BibEntry& bib);

PaperRecord paper_from_json(const nlohmann::json& j);
nlohmann::ordered_json paper_to_json(const PaperRecord& paper);

SurveyScope scope_from_json(const nlohmann::json& j);
nlohmann::ordered_json scope_to_json(const SurveyScope& scope);

CandidateFilter filter_from_json(const nlohmann::json& j);

PaperSummary summary_from_json(const nlohmann::json& j);
nlohmann::ordered_json summary_to_json(const PaperSummary& summary);

/// Reads newline-delimited paper records and keeps the ones the filter
/// accepts, in feed order. Blank lines are skipped. Never judges relevance.
std::vector<PaperRecord> ingest_feed(const std::filesystem::path& feed,
                                     const CandidateFilter& filter);

/// Same as ingest_feed over in-memory feed text.
std::vector<PaperRecord> ingest_feed_text(std::string_view text,
                                          const CandidateFilter& filter);

}  // namespace livesurvey
