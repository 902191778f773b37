#include "livesurvey/update.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <future>
#include <set>
#include <fstream>
#include <sstream>

#include "livesurvey/diff.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

using ojson = nlohmann::ordered_json;

ojson plain_row(const TableRow& row) {
  ojson j = ojson::object();
  for (const auto& [name, value] : row) {
    if (const auto* s = std::get_if<std::string>(&value)) {
      j[name] = *s;
    } else {
      j[name] = std::get<std::int64_t>(value);
    }
  }
  return j;
}

TableRow row_from_plain(const nlohmann::json& j) {
  TableRow row;
  for (const auto& [name, value] : j.items()) {
    if (value.is_number_integer()) {
      row.emplace(name, value.get<std::int64_t>());
    } else if (value.is_string()) {
      row.emplace(name, value.get<std::string>());
    } else {
      throw Error(ErrorKind::kParse, "row cell '" + name + "' must be a string or integer");
    }
  }
  return row;
}

ojson reference_json(const Reference& r) {
  ojson j;
  j["key"] = r.key;
  j["number"] = r.number;
  j["bib"] = ojson::object();
  for (const auto& [k, v] : r.bib_fields) j["bib"][k] = v;
  return j;
}

Reference reference_from(const nlohmann::json& j) {
  Reference r;
  r.key = j.at("key").get<std::string>();
  r.number = j.at("number").get<std::uint64_t>();
  const auto bib = j.value("bib", nlohmann::json::object());
  for (const auto& [k, v] : bib.items()) {
    r.bib_fields.emplace(k, v.get<std::string>());
  }
  return r;
}

template <class T>
std::optional<T> opt(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

void clear_routing(UpdateRecord& r) {
  r.routed_section.reset();
  r.routed_table.reset();
  r.insertion_sentence_id.reset();
  r.inserted_sentence_ids.clear();
  r.inserted_sentence_texts.clear();
  r.inserted_row.reset();
  r.new_reference.reset();
  r.resolved_citation_keys.clear();
}

}  // namespace

const char* to_string(UpdateDecision decision) {
  switch (decision) {
    case UpdateDecision::kAbstained: return "abstained";
    case UpdateDecision::kUpdated: return "updated";
    case UpdateDecision::kFailed: return "failed";
  }
  return "failed";
}

bool UpdateRecord::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

ojson record_to_json(const UpdateRecord& r) {
  ojson j;
  j["paper_id"] = r.paper_id;
  j["epoch_id"] = r.epoch_id;
  j["decision"] = to_string(r.decision);
  j["summary"] = r.summary ? ojson(summary_to_json(*r.summary)) : ojson(nullptr);
  j["parse_abstain"] = r.parse_abstain;
  j["ranked_sections"] = r.ranked_sections;
  j["routed_section"] = r.routed_section ? ojson(*r.routed_section) : ojson(nullptr);
  j["routed_table"] = r.routed_table ? ojson(*r.routed_table) : ojson(nullptr);
  j["table_answers"] = ojson::array();
  for (const auto& [id, answer] : r.table_answers) {
    j["table_answers"].push_back(ojson{{"table", id}, {"answer", answer}});
  }
  j["insertion_sentence_id"] =
      r.insertion_sentence_id ? ojson(*r.insertion_sentence_id) : ojson(nullptr);
  j["insertion_fallback"] = r.insertion_fallback;
  j["inserted_sentence_ids"] = r.inserted_sentence_ids;
  j["inserted_sentence_texts"] = r.inserted_sentence_texts;
  j["draft_text"] = r.draft_text;
  j["final_text"] = r.final_text;
  j["inserted_row"] = r.inserted_row ? plain_row(*r.inserted_row) : ojson(nullptr);
  j["resolved_citation_keys"] = r.resolved_citation_keys;
  j["new_reference"] = r.new_reference ? reference_json(*r.new_reference) : ojson(nullptr);
  j["placeholder_count"] = r.placeholder_count;
  j["flags"] = r.flags;
  j["table_error"] = r.table_error;
  j["error"] = r.error;
  j["error_kind"] = r.error_kind;
  j["delta_tokens"] = r.delta_tokens;
  j["delta_out"] = r.delta_out;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  return j;
}

UpdateRecord record_from_json(const nlohmann::json& j) {
  try {
    UpdateRecord r;
    r.paper_id = j.at("paper_id").get<std::string>();
    r.epoch_id = j.value("epoch_id", std::string());
    const std::string decision = j.at("decision").get<std::string>();
    if (decision == "abstained") r.decision = UpdateDecision::kAbstained;
    else if (decision == "updated") r.decision = UpdateDecision::kUpdated;
    else if (decision == "failed") r.decision = UpdateDecision::kFailed;
    else throw Error(ErrorKind::kParse, "unknown decision '" + decision + "'");
    if (auto s = j.find("summary"); s != j.end() && !s->is_null()) r.summary = summary_from_json(*s);
    r.parse_abstain = j.value("parse_abstain", false);
    r.ranked_sections = j.value("ranked_sections", std::vector<std::string>{});
    r.routed_section = opt<std::string>(j, "routed_section");
    r.routed_table = opt<std::string>(j, "routed_table");
    for (const auto& a : j.value("table_answers", nlohmann::json::array())) {
      r.table_answers.emplace_back(a.at("table").get<std::string>(),
                                   a.at("answer").get<std::string>());
    }
    r.insertion_sentence_id = opt<std::string>(j, "insertion_sentence_id");
    r.insertion_fallback = j.value("insertion_fallback", false);
    r.inserted_sentence_ids = j.value("inserted_sentence_ids", std::vector<std::string>{});
    r.inserted_sentence_texts = j.value("inserted_sentence_texts", std::vector<std::string>{});
    r.draft_text = j.value("draft_text", std::string());
    r.final_text = j.value("final_text", std::string());
    if (auto row = j.find("inserted_row"); row != j.end() && !row->is_null()) {
      r.inserted_row = row_from_plain(*row);
    }
    r.resolved_citation_keys = j.value("resolved_citation_keys", std::vector<std::string>{});
    if (auto ref = j.find("new_reference"); ref != j.end() && !ref->is_null()) {
      r.new_reference = reference_from(*ref);
    }
    r.placeholder_count = j.value("placeholder_count", std::size_t{0});
    r.flags = j.value("flags", std::vector<std::string>{});
    r.table_error = j.value("table_error", std::string());
    r.error = j.value("error", std::string());
    r.error_kind = j.value("error_kind", std::string());
    r.delta_tokens = j.value("delta_tokens", std::size_t{0});
    r.delta_out = j.value("delta_out", std::size_t{0});
    r.started_at = j.value("started_at", std::string());
    r.finished_at = j.value("finished_at", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("malformed update record: ") + e.what());
  }
}

std::string utc_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Section insert_paragraph(const Section& section, std::string_view after,
                         std::string_view paragraph,
                         std::vector<std::string>* inserted_ids) {
  auto pos = section.sentences.end();
  if (after != kAppend) {
    pos = std::find_if(section.sentences.begin(), section.sentences.end(),
                       [&](const Sentence& s) { return s.id == after; });
    if (pos == section.sentences.end()) {
      throw Error(ErrorKind::kPrecondition, "insertion point '" + std::string(after) +
                                                "' is not a sentence of section '" +
                                                section.id + "'");
    }
    ++pos;
  }
  Section out = section;
  std::vector<Sentence> fresh;
  for (auto& text : segment_sentences(paragraph)) {
    fresh.push_back({section.id + ":" + std::to_string(out.next_sentence++), std::move(text)});
    if (inserted_ids) inserted_ids->push_back(fresh.back().id);
  }
  const auto offset = pos - section.sentences.begin();
  out.sentences.insert(out.sentences.begin() + offset, fresh.begin(), fresh.end());
  return out;
}

CitationResolution resolve_citations(std::string_view draft,
                                     const std::vector<BibEntry>& bib_entries,
                                     const SurveyDocument& doc) {
  CitationResolution res;
  res.references = doc.references;
  const std::size_t placeholders = count_placeholders(draft);
  if (placeholders == 0) {
    res.text = std::string(draft);
    return res;
  }
  if (bib_entries.empty() || (bib_entries.size() > 1 && placeholders > bib_entries.size())) {
    throw Error(ErrorKind::kCitation,
                std::to_string(placeholders) + " citation placeholder(s) but " +
                    std::to_string(bib_entries.size()) + " bibliographic entr" +
                    (bib_entries.size() == 1 ? "y" : "ies"));
  }
  auto number_for = [&](const BibEntry& bib) -> std::uint64_t {
    if (bib.key.empty()) {
      throw Error(ErrorKind::kCitation, "bibliographic entry has no citation key");
    }
    for (const auto& r : res.references) {
      if (r.key == bib.key) return r.number;
    }
    std::uint64_t max = 0;
    for (const auto& r : res.references) max = std::max(max, r.number);
    res.references.push_back({bib.key, bib.fields, max + 1});
    ++res.added;
    return max + 1;
  };
  std::size_t index = 0;
  std::size_t pos = 0;
  while (true) {
    auto hit = draft.find(kCitePlaceholder, pos);
    res.text.append(draft.substr(pos, hit == std::string_view::npos ? hit : hit - pos));
    if (hit == std::string_view::npos) break;
    const BibEntry& bib = bib_entries.size() == 1 ? bib_entries.front() : bib_entries[index];
    res.text += "[" + std::to_string(number_for(bib)) + "]";
    res.keys.push_back(bib.key);
    ++index;
    pos = hit + kCitePlaceholder.size();
  }
  if (res.added == 1) res.new_reference = res.references.back();
  return res;
}

UpdateResult apply_update(const SurveyState& state, const PaperRecord& paper,
                          const UpdateContext& ctx) {
  const StructuredOutline& outline = state.outline();
  if (!outline.approved) {
    throw Error(ErrorKind::kPrecondition,
                "outline is not approved; run the review step before updating");
  }
  AgentContext agents{ctx.generator, outline.scope.title};
  UpdateRecord record;
  record.paper_id = paper.id;
  record.epoch_id = state.epoch_id();
  record.started_at = ctx.clock();

  auto finish = [&](SurveyState next) {
    record.finished_at = ctx.clock();
    return UpdateResult{std::move(next), std::move(record)};
  };

  try {
    PaperSummary summary = run_analysis_agent(agents, paper);
    record.summary = summary;

    const AbstentionDecision abstain =
        run_abstention_agent(agents, summary, outline.scope);
    record.parse_abstain = abstain.parse_abstain;
    if (abstain.parse_abstain) record.flags.emplace_back(flags::kParseAbstain);
    if (!abstain.include) {
      record.decision = UpdateDecision::kAbstained;
      return finish(state);
    }

    const SurveyDocument& doc = state.document();
    auto table_future = std::async(std::launch::async, [&] {
      return run_table_routing(agents, summary, outline, doc);
    });
    RoutingDecision routing;
    try {
      routing = run_section_routing(agents, summary, outline, doc);
    } catch (...) {
      table_future.wait();
      throw;
    }
    const TableRoutingDecision table_routing = table_future.get();

    record.ranked_sections = routing.ranked_sections;
    record.routed_section = routing.ranked_sections.front();
    record.insertion_sentence_id = routing.insertion_sentence_id;
    record.insertion_fallback = routing.insertion_fallback;
    if (routing.insertion_fallback) record.flags.emplace_back(flags::kInsertionFallback);
    for (const auto& [id, answer] : table_routing.answers) {
      record.table_answers.emplace_back(id, to_string(answer));
    }
    record.routed_table = table_routing.table_id;

    const Section* target = doc.find_section(*record.routed_section);
    const TextDraft draft = run_text_synthesis(agents, target->text(), summary);
    record.draft_text = draft.text;
    record.placeholder_count = draft.placeholder_count;
    if (draft.placeholder_count == 0) record.flags.emplace_back(flags::kNoPlaceholder);

    CitationResolution cites = resolve_citations(draft.text, {paper.bib}, doc);
    record.final_text = cites.text;
    record.resolved_citation_keys = cites.keys;
    record.new_reference = cites.new_reference;

    SurveyDocument next = doc;
    next.references = std::move(cites.references);
    Section* section = next.find_section(*record.routed_section);
    *section = insert_paragraph(*section, routing.insertion_sentence_id, cites.text,
                                &record.inserted_sentence_ids);
    for (const auto& id : record.inserted_sentence_ids) {
      record.inserted_sentence_texts.push_back(section->find_sentence(id)->text);
    }

    if (record.routed_table) {
      try {
        const SurveyTable* table = doc.find_table(*record.routed_table);
        TableRow row = run_table_synthesis(agents, *table, summary);
        next.find_table(*record.routed_table)->rows.push_back(row);
        record.inserted_row = std::move(row);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kScriptGap || e.kind() == ErrorKind::kTransport) throw;
        record.table_error = e.what();
        record.flags.emplace_back(flags::kTableFailed);
      }
    }

    SurveyState next_state = state.with_document(std::move(next));
    const EditScript script = token_diff(doc, next_state.document());
    std::set<std::string> scope{section_region(*record.routed_section)};
    if (record.inserted_row) scope.insert(table_region(*record.routed_table));
    record.delta_tokens = delta_tokens(script);
    record.delta_out = delta_out(script, scope);
    record.decision = UpdateDecision::kUpdated;
    return finish(std::move(next_state));
  } catch (const Error& e) {
    const auto summary = record.summary;
    const auto parse_abstain = record.parse_abstain;
    clear_routing(record);
    record.decision = UpdateDecision::kFailed;
    record.summary = summary;
    record.parse_abstain = parse_abstain;
    record.error = e.what();
    record.error_kind = to_string(e.kind());
    return finish(state);
  }
}

void publish(const SurveyState& state, const std::filesystem::path& out) {
  write_file(out, serialize_document(state.document()));
}

void append_audit(const std::filesystem::path& log, const UpdateRecord& record) {
  if (log.has_parent_path()) std::filesystem::create_directories(log.parent_path());
  std::ofstream f(log, std::ios::app | std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot open audit log " + log.string());
  f << record_to_json(record).dump() << '\n';
  if (!f) throw Error(ErrorKind::kIo, "cannot write audit log " + log.string());
}

std::vector<UpdateRecord> read_audit(const std::filesystem::path& log) {
  std::vector<UpdateRecord> records;
  std::istringstream in(read_file(log));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kParse, log.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return records;
}

SurveyDocument replay_update(const SurveyDocument& before, const UpdateRecord& record) {
  if (record.decision != UpdateDecision::kUpdated) return before;
  SurveyDocument after = before;
  if (!record.routed_section || !record.insertion_sentence_id) {
    throw Error(ErrorKind::kIntegrity, "updated record without a routed section");
  }
  Section* section = after.find_section(*record.routed_section);
  if (!section) {
    throw Error(ErrorKind::kIntegrity, "record routes to unknown section '" +
                                           *record.routed_section + "'");
  }
  std::vector<std::string> ids;
  try {
    *section = insert_paragraph(*section, *record.insertion_sentence_id, record.final_text, &ids);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIntegrity, std::string("record does not fit document: ") + e.what());
  }
  if (ids != record.inserted_sentence_ids) {
    throw Error(ErrorKind::kIntegrity, "replayed sentence ids differ from the record");
  }
  if (record.new_reference) after.references.push_back(*record.new_reference);
  if (record.inserted_row) {
    SurveyTable* table = record.routed_table ? after.find_table(*record.routed_table) : nullptr;
    if (!table) throw Error(ErrorKind::kIntegrity, "record inserts a row into an unknown table");
    table->rows.push_back(*record.inserted_row);
  }
  try {
    validate_document(after);
  } catch (const Error& e) {
    throw Error(ErrorKind::kIntegrity, std::string("replayed document is invalid: ") + e.what());
  }
  return after;
}

}  // namespace livesurvey
