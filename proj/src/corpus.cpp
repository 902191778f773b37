#include "livesurvey/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "livesurvey/error.hpp"

namespace livesurvey {
namespace {

std::string require_string(const nlohmann::json& j, const char* field,
                           const std::string& where) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorKind::kParse,
                where + ": missing or non-string field '" + field + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return {};
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::vector<std::string> string_list(const nlohmann::json& j,
                                     const char* field,
                                     const std::string& where) {
  std::vector<std::string> out;
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw Error(ErrorKind::kParse,
                where + ": field '" + field + "' must be an array");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorKind::kParse,
                  where + ": field '" + field + "' must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool contains(const std::vector<std::string>& haystack,
              const std::string& needle) {
  return std::find(haystack.begin(), haystack.end(), needle) !=
         haystack.end();
}

}  // namespace

std::string PaperSummary::render() const {
  return "### Methods\n" + methods + "\n\n### Novelty\n" + novelty +
         "\n\n### Results\n" + results;
}

bool is_iso_date(std::string_view date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (date[i] < '0' || date[i] > '9') return false;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (date[i] - '0');
    return v;
  };
  std::chrono::year_month_day ymd{
      std::chrono::year{num(0, 4)},
      std::chrono::month{static_cast<unsigned>(num(5, 2))},
      std::chrono::day{static_cast<unsigned>(num(8, 2))}};
  return ymd.ok();
}

bool CandidateFilter::accepts(const PaperRecord& paper) const {
  if (!allowed_categories.empty() &&
      std::none_of(paper.categories.begin(), paper.categories.end(),
                   [&](const std::string& c) {
                     return contains(allowed_categories, c);
                   })) {
    return false;
  }
  if (!allowed_venues.empty() && !contains(allowed_venues, paper.venue)) {
    return false;
  }
  // ISO dates compare correctly as strings.
  if (date_start && paper.date < *date_start) return false;
  if (date_end && paper.date > *date_end) return false;
  if (require_peer_reviewed && paper.venue == kPreprintVenue) return false;
  return true;
}

void CandidateFilter::validate() const {
  for (const auto* d : {&date_start, &date_end}) {
    if (d->has_value() && !is_iso_date(**d)) {
      throw Error(ErrorKind::kConfig, "filter date '" + **d +
                                          "' is not a valid YYYY-MM-DD date");
    }
  }
  if (date_start && date_end && *date_start > *date_end) {
    throw Error(ErrorKind::kConfig, "filter date range start is after end");
  }
}

BibEntry bib_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kParse, "bib must be an object");
  BibEntry bib;
  for (const auto& [name, value] : j.items()) {
    std::string text = value.is_string() ? value.get<std::string>()
                                         : value.dump();
    if (name == "key") {
      bib.key = std::move(text);
    } else {
      bib.fields.emplace(name, std::move(text));
    }
  }
  if (bib.key.empty()) {
    throw Error(ErrorKind::kParse, "bib entry has an empty citation key");
  }
  return bib;
}

nlohmann::ordered_json bib_to_json(const BibEntry& bib) {
  nlohmann::ordered_json j;
  j["key"] = bib.key;
  for (const auto& [name, value] : bib.fields) j[name] = value;
  return j;
}

PaperRecord paper_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorKind::kParse, "paper record must be a JSON object");
  }
  PaperRecord p;
  p.id = require_string(j, "id", "paper");
  const std::string where = "paper '" + p.id + "'";
  p.title = optional_string(j, "title");
  p.abstract = optional_string(j, "abstract");
  p.full_text = optional_string(j, "full_text");
  p.venue = optional_string(j, "venue");
  p.date = optional_string(j, "date");
  if (!p.date.empty() && !is_iso_date(p.date)) {
    throw Error(ErrorKind::kParse, where + ": invalid date '" + p.date + "'");
  }
  p.categories = string_list(j, "categories", where);
  auto bib = j.find("bib");
  if (bib == j.end()) throw Error(ErrorKind::kParse, where + ": missing bib");
  p.bib = bib_from_json(*bib);
  return p;
}

nlohmann::ordered_json paper_to_json(const PaperRecord& paper) {
  nlohmann::ordered_json j;
  j["id"] = paper.id;
  j["title"] = paper.title;
  j["abstract"] = paper.abstract;
  j["full_text"] = paper.full_text;
  j["venue"] = paper.venue;
  j["date"] = paper.date;
  j["categories"] = paper.categories;
  j["bib"] = bib_to_json(paper.bib);
  return j;
}

SurveyScope scope_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::kParse, "scope must be an object");
  SurveyScope s;
  s.title = optional_string(j, "title");
  s.keywords = string_list(j, "keywords", "scope");
  s.abstract = optional_string(j, "abstract");
  s.core_criterion = optional_string(j, "core_criterion");
  if (s.core_criterion.empty()) {
    throw Error(ErrorKind::kParse, "scope: core_criterion must be non-empty");
  }
  return s;
}

nlohmann::ordered_json scope_to_json(const SurveyScope& scope) {
  nlohmann::ordered_json j;
  j["title"] = scope.title;
  j["keywords"] = scope.keywords;
  j["abstract"] = scope.abstract;
  j["core_criterion"] = scope.core_criterion;
  return j;
}

CandidateFilter filter_from_json(const nlohmann::json& j) {
  CandidateFilter f;
  if (j.is_null()) return f;
  if (!j.is_object()) {
    throw Error(ErrorKind::kConfig, "filter must be an object");
  }
  f.allowed_categories = string_list(j, "allowed_categories", "filter");
  f.allowed_venues = string_list(j, "allowed_venues", "filter");
  if (auto it = j.find("date_range"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2) {
      throw Error(ErrorKind::kConfig,
                  "filter.date_range must be [start, end]");
    }
    if (!(*it)[0].is_null()) f.date_start = (*it)[0].get<std::string>();
    if (!(*it)[1].is_null()) f.date_end = (*it)[1].get<std::string>();
  }
  f.require_peer_reviewed = j.value("require_peer_reviewed", false);
  f.validate();
  return f;
}

PaperSummary summary_from_json(const nlohmann::json& j) {
  PaperSummary s;
  s.methods = optional_string(j, "methods");
  s.novelty = optional_string(j, "novelty");
  s.results = optional_string(j, "results");
  s.source_paper_id = optional_string(j, "source_paper_id");
  return s;
}

nlohmann::ordered_json summary_to_json(const PaperSummary& summary) {
  nlohmann::ordered_json j;
  j["source_paper_id"] = summary.source_paper_id;
  j["methods"] = summary.methods;
  j["novelty"] = summary.novelty;
  j["results"] = summary.results;
  return j;
}

std::vector<PaperRecord> ingest_feed_text(std::string_view text,
                                          const CandidateFilter& filter) {
  filter.validate();
  std::vector<PaperRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PaperRecord paper;
    try {
      paper = paper_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, "feed line " + std::to_string(line_no) +
                                         ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, "feed line " + std::to_string(line_no) +
                                         ": " + e.what());
    }
    if (filter.accepts(paper)) out.push_back(std::move(paper));
  }
  return out;
}

std::vector<PaperRecord> ingest_feed(const std::filesystem::path& feed,
                                     const CandidateFilter& filter) {
  std::ifstream in(feed, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot read feed file " + feed.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_feed_text(buf.str(), filter);
}

}  // namespace livesurvey
