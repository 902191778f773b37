#include "livesurvey/agents.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "livesurvey/error.hpp"
#include "livesurvey/lenient_json.hpp"
#include "livesurvey/prompts.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Positions of `word` in `text` (both lowercased) with word boundaries.
bool has_word(std::string_view text, std::string_view word) {
  for (auto pos = text.find(word); pos != std::string_view::npos;
       pos = text.find(word, pos + 1)) {
    bool left = pos == 0 || !is_word_char(text[pos - 1]);
    auto end = pos + word.size();
    bool right = end == text.size() || !is_word_char(text[end]);
    if (left && right) return true;
  }
  return false;
}

std::string json_id(const nlohmann::json& v) {
  if (v.is_string()) return trim(v.get<std::string>());
  if (v.is_number()) return v.dump();
  throw Error(ErrorKind::kParse, "section id must be a string or number, got " +
                                     v.dump());
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += i + 1 == ids.size() ? ", and " : ", ";
    out += ids[i];
  }
  if (ids.size() == 2) out = ids[0] + " and " + ids[1];
  return out.empty() ? "none" : out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

template <class Parse>
auto call_with_retries(const AgentContext& ctx, std::string_view role,
                       const std::string& paper_id, const std::string& prompt,
                       ErrorKind failure_kind, std::string_view failure_label,
                       Parse&& parse) {
  const int attempts = 1 + std::max(0, ctx.generator.max_retries());
  std::string feedback;
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    GenerationRequest request{std::string(role), paper_id, attempt,
                              {{"user", prompt + feedback}}};
    const std::string output = ctx.generator.generate(request);
    try {
      return parse(output);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kTransport ||
          e.kind() == ErrorKind::kScriptGap) {
        throw;
      }
      last_error = e.what();
    } catch (const nlohmann::json::exception& e) {
      last_error = e.what();
    }
    feedback = prompts::retry_hint(attempt + 1, last_error);
  }
  throw Error(failure_kind, std::string(failure_label) + " after " +
                                std::to_string(attempts) +
                                " attempt(s): " + last_error);
}

std::string render_survey_for_outline(const SurveyDocument& doc) {
  std::string out;
  for (const auto& s : doc.sections) {
    out += "## " + s.id + " " + s.title + "\n" + s.text() + "\n\n";
  }
  for (const auto& t : doc.tables) {
    std::vector<std::string> cols;
    for (const auto& c : t.schema) cols.push_back(c.name);
    out += "Table " + t.id + ": " + t.title + "\nColumns: " + join(cols, ", ") +
           "\nRows: " + std::to_string(t.rows.size()) + "\n\n";
  }
  return out;
}

bool preserves_title(const std::string& produced, const std::string& original) {
  const std::string p = normalize_whitespace(produced);
  const std::string o = normalize_whitespace(original);
  if (o.empty()) return true;
  // "3.2 Deep Learning-Based ..." keeps the title "Deep Learning-Based ...".
  return p == o || (p.size() > o.size() &&
                    p.compare(p.size() - o.size(), o.size(), o) == 0 &&
                    p[p.size() - o.size() - 1] == ' ');
}

StructuredOutline parse_outline_output(std::string_view output,
                                       const SurveyDocument& doc,
                                       const std::vector<std::string>& sections,
                                       const std::vector<std::string>& tables,
                                       const SurveyScope& scope) {
  const std::string cleaned = strip_reasoning(output);
  const auto brace = cleaned.find('{');
  const auto bracket = cleaned.find('[');
  std::vector<nlohmann::json> section_items;
  std::vector<nlohmann::json> table_items;
  if (bracket != std::string::npos && (brace == std::string::npos || bracket < brace)) {
    for (const auto& item : parse_lenient_json(cleaned, JsonShape::kArray)) {
      (item.contains("section_title") ? section_items : table_items)
          .push_back(item);
    }
  } else {
    auto j = parse_lenient_json(cleaned, JsonShape::kObject);
    if (j.contains("section_title")) {
      section_items.push_back(j);
    } else {
      for (const auto& s : j.value("sections", nlohmann::json::array())) {
        section_items.push_back(s);
      }
      for (const auto& t : j.value("tables", nlohmann::json::array())) {
        table_items.push_back(t);
      }
    }
  }

  StructuredOutline outline;
  outline.scope = scope;
  std::map<std::string, SectionEntry> produced_sections;
  for (const auto& item : section_items) {
    SectionEntry e;
    e.id = json_id(item.at("id"));
    if (std::find(sections.begin(), sections.end(), e.id) == sections.end()) {
      throw Error(ErrorKind::kSchema,
                  "outline invents section '" + e.id + "' outside the allowed set");
    }
    e.section_title = item.value("section_title", std::string());
    if (!preserves_title(e.section_title, doc.find_section(e.id)->title)) {
      throw Error(ErrorKind::kSchema, "outline renames section '" + e.id + "'");
    }
    e.page_numbers = item.contains("page_numbers") && item["page_numbers"].is_string()
                         ? item["page_numbers"].get<std::string>()
                         : (item.contains("page_numbers") ? item["page_numbers"].dump() : "");
    e.summary = trim(item.value("summary", std::string()));
    if (e.summary.empty()) {
      throw Error(ErrorKind::kSchema, "outline section '" + e.id + "' has no summary");
    }
    for (const auto& f : item.value("table_relevant", nlohmann::json::array())) {
      e.table_relevant.push_back(f.is_boolean() ? (f.get<bool>() ? 1 : 0) : f.get<int>());
    }
    if (e.table_relevant.size() != tables.size()) {
      throw Error(ErrorKind::kSchema, "outline section '" + e.id +
                                          "' needs one table_relevant flag per "
                                          "allowed table");
    }
    if (!produced_sections.emplace(e.id, e).second) {
      throw Error(ErrorKind::kSchema, "outline repeats section '" + e.id + "'");
    }
  }
  std::map<std::string, TableEntry> produced_tables;
  for (const auto& item : table_items) {
    TableEntry e;
    e.id = json_id(item.at("id"));
    if (std::find(tables.begin(), tables.end(), e.id) == tables.end()) {
      throw Error(ErrorKind::kSchema,
                  "outline invents table '" + e.id + "' outside the allowed set");
    }
    e.title = item.value("title", std::string());
    if (!preserves_title(e.title, doc.find_table(e.id)->title)) {
      throw Error(ErrorKind::kSchema, "outline renames table '" + e.id + "'");
    }
    e.page_numbers = item.contains("page_numbers") && item["page_numbers"].is_string()
                         ? item["page_numbers"].get<std::string>()
                         : "";
    e.summary = trim(item.value("summary", std::string()));
    if (!produced_tables.emplace(e.id, e).second) {
      throw Error(ErrorKind::kSchema, "outline repeats table '" + e.id + "'");
    }
  }
  for (const auto& id : sections) {
    auto it = produced_sections.find(id);
    if (it == produced_sections.end()) {
      throw Error(ErrorKind::kSchema, "outline omits section '" + id + "'");
    }
    outline.section_entries.push_back(it->second);
  }
  for (const auto& id : tables) {
    auto it = produced_tables.find(id);
    if (it == produced_tables.end()) {
      throw Error(ErrorKind::kSchema, "outline omits table '" + id + "'");
    }
    outline.table_entries.push_back(it->second);
  }
  validate_outline(outline);
  return outline;
}

std::string render_section_list(const StructuredOutline& outline) {
  std::string out;
  for (const auto& e : outline.section_entries) {
    out += e.id + ": " + e.section_title + "\n    " + e.summary + "\n";
  }
  return out;
}

std::string render_numbered_section(const Section& section) {
  std::string out;
  for (const auto& s : section.sentences) {
    out += "[" + s.id + "] " + s.text + "\n";
  }
  return out;
}

std::string pick_insertion_sentence(std::string_view output,
                                    const Section& section, bool& fallback) {
  const std::string cleaned = strip_reasoning(output);
  std::size_t best_pos = std::string::npos;
  std::string best;
  for (const auto& s : section.sentences) {
    for (auto pos = cleaned.find(s.id); pos != std::string::npos;
         pos = cleaned.find(s.id, pos + 1)) {
      const auto end = pos + s.id.size();
      const bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(cleaned[pos - 1])) ||
                                      cleaned[pos - 1] == '.' || cleaned[pos - 1] == ':');
      const bool right = end == cleaned.size() ||
                         !std::isdigit(static_cast<unsigned char>(cleaned[end]));
      if (left && right) {
        if (pos < best_pos) {
          best_pos = pos;
          best = s.id;
        }
        break;
      }
    }
  }
  fallback = false;
  if (!best.empty()) return best;
  if (!has_word(lower(cleaned), "append")) fallback = true;
  return std::string(kAppend);
}

std::string describe_table(const TableEntry& entry, const SurveyTable& table) {
  std::vector<std::string> cols;
  for (const auto& c : table.schema) cols.push_back(c.name);
  return entry.title + "\n" + entry.summary + "\nColumns: " + join(cols, ", ");
}

}  // namespace

std::string table_routing_role(std::string_view table_id) {
  return std::string(roles::kTableRouting) + "/" + std::string(table_id);
}

const char* to_string(YesNo answer) {
  switch (answer) {
    case YesNo::kYes: return "yes";
    case YesNo::kNo: return "no";
    case YesNo::kUnparsed: return "unparsed";
  }
  return "unparsed";
}

StructuredOutline run_outline_agent(const AgentContext& ctx,
                                    const SurveyDocument& doc,
                                    const std::vector<std::string>& allowed_sections,
                                    const std::vector<std::string>& allowed_tables,
                                    const SurveyScope& scope) {
  for (const auto& id : allowed_sections) {
    if (!doc.find_section(id)) {
      throw Error(ErrorKind::kPrecondition,
                  "allowed section '" + id + "' is not in the document");
    }
  }
  std::vector<std::string> table_labels;
  for (const auto& id : allowed_tables) {
    if (!doc.find_table(id)) {
      throw Error(ErrorKind::kPrecondition,
                  "allowed table '" + id + "' is not in the document");
    }
    table_labels.push_back("Table " + id);
  }
  const std::string prompt = prompts::render(
      prompts::kOutline, {{"survey_topic", ctx.survey_topic},
                          {"section_list", join_ids(allowed_sections)},
                          {"table_list", join_ids(table_labels)},
                          {"survey_text", render_survey_for_outline(doc)}});
  return call_with_retries(
      ctx, roles::kOutline, "", prompt, ErrorKind::kSchema,
      "outline schema violation", [&](const std::string& out) {
        return parse_outline_output(out, doc, allowed_sections, allowed_tables,
                                    scope);
      });
}

PaperSummary parse_analysis_output(std::string_view text) {
  const std::string cleaned = strip_reasoning(text);
  std::map<std::string, std::string> parts;
  std::string current;
  std::size_t pos = 0;
  while (pos <= cleaned.size()) {
    auto eol = cleaned.find('\n', pos);
    if (eol == std::string::npos) eol = cleaned.size();
    std::string line = trim(std::string_view(cleaned).substr(pos, eol - pos));
    pos = eol + 1;
    std::string heading;
    if (!line.empty() && line[0] == '#') {
      heading = lower(trim(line.substr(line.find_first_not_of('#'))));
      if (!heading.empty() && heading.back() == ':') heading.pop_back();
    }
    if (heading == "methods" || heading == "novelty" || heading == "results") {
      if (parts.count(heading)) {
        throw Error(ErrorKind::kParse, "heading '### " + heading + "' repeats");
      }
      current = heading;
      parts[current];
      continue;
    }
    if (!current.empty()) {
      auto& body = parts[current];
      if (!body.empty()) body.push_back('\n');
      body += line;
    }
  }
  PaperSummary s;
  for (const char* name : {"methods", "novelty", "results"}) {
    auto it = parts.find(name);
    if (it == parts.end() || trim(it->second).empty()) {
      std::string title(name);
      title[0] = static_cast<char>(std::toupper(title[0]));
      throw Error(ErrorKind::kParse, "missing or empty '### " + title + "' section");
    }
  }
  s.methods = trim(parts["methods"]);
  s.novelty = trim(parts["novelty"]);
  s.results = trim(parts["results"]);
  return s;
}

PaperSummary run_analysis_agent(const AgentContext& ctx,
                                const PaperRecord& paper) {
  if (trim(paper.full_text).empty()) {
    throw Error(ErrorKind::kPrecondition,
                "paper '" + paper.id + "' has no full text to analyze");
  }
  std::string paper_text = paper.full_text;
  if (!paper.title.empty()) paper_text = "Title: " + paper.title + "\n\n" + paper_text;
  const std::string prompt =
      prompts::render(prompts::kAnalysis, {{"paper_text", paper_text}});
  PaperSummary summary = call_with_retries(
      ctx, roles::kAnalysis, paper.id, prompt, ErrorKind::kAgent,
      "analysis parse error",
      [](const std::string& out) { return parse_analysis_output(out); });
  summary.source_paper_id = paper.id;
  return summary;
}

std::optional<bool> parse_true_false(std::string_view text) {
  const std::string l = lower(strip_reasoning(text));
  const bool t = has_word(l, "true");
  const bool f = has_word(l, "false");
  if (t == f) return std::nullopt;
  return t;
}

AbstentionDecision run_abstention_agent(const AgentContext& ctx,
                                        const PaperSummary& summary,
                                        const SurveyScope& scope) {
  if (trim(scope.core_criterion).empty()) {
    throw Error(ErrorKind::kPrecondition, "survey scope has no core criterion");
  }
  const std::string prompt = prompts::render(
      prompts::kAbstention, {{"Title", scope.title},
                             {"Keywords", join(scope.keywords, ", ")},
                             {"Abstract", scope.abstract},
                             {"Author defined criterion", scope.core_criterion},
                             {"paper_summary", summary.render()}});
  AbstentionDecision decision;
  try {
    decision.include = call_with_retries(
        ctx, roles::kAbstention, summary.source_paper_id, prompt,
        ErrorKind::kAgent, "abstention parse error", [&](const std::string& out) {
          ++decision.attempts;
          auto v = parse_true_false(out);
          if (!v) throw Error(ErrorKind::kParse, "expected exactly one of TRUE or FALSE");
          return *v;
        });
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kAgent) throw;
    decision.include = false;
    decision.parse_abstain = true;
  }
  return decision;
}

std::vector<std::string> parse_section_ranking(std::string_view text,
                                               const StructuredOutline& outline) {
  const auto arr = parse_lenient_json(text, JsonShape::kArray);
  const std::size_t expected =
      std::min<std::size_t>(3, outline.section_entries.size());
  if (arr.size() != expected) {
    throw Error(ErrorKind::kParse, "expected exactly " + std::to_string(expected) +
                                       " section ids, got " +
                                       std::to_string(arr.size()));
  }
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& v : arr) {
    std::string id = json_id(v);
    if (!outline.find_section(id)) {
      throw Error(ErrorKind::kParse, "section id '" + id + "' is not in the outline");
    }
    if (!seen.insert(id).second) {
      throw Error(ErrorKind::kParse, "section id '" + id + "' is repeated");
    }
    ids.push_back(std::move(id));
  }
  return ids;
}

RoutingDecision run_section_routing(const AgentContext& ctx,
                                    const PaperSummary& summary,
                                    const StructuredOutline& outline,
                                    const SurveyDocument& doc) {
  if (!outline.approved) {
    throw Error(ErrorKind::kPrecondition, "section routing needs an approved outline");
  }
  const std::string summary_text = summary.render();
  const std::string ranking_prompt = prompts::render(
      prompts::kSectionRouting, {{"survey_topic", ctx.survey_topic},
                                 {"section_list", render_section_list(outline)},
                                 {"paper_summary", summary_text}});
  RoutingDecision decision;
  decision.ranked_sections = call_with_retries(
      ctx, roles::kSectionRouting, summary.source_paper_id, ranking_prompt,
      ErrorKind::kAgent, "routing error", [&](const std::string& out) {
        return parse_section_ranking(out, outline);
      });

  const Section* top = doc.find_section(decision.ranked_sections.front());
  if (!top) {
    throw Error(ErrorKind::kIntegrity, "routed section '" +
                                           decision.ranked_sections.front() +
                                           "' is missing from the document");
  }
  const std::string insertion_prompt = prompts::render(
      prompts::kInsertionPoint, {{"survey_topic", ctx.survey_topic},
                                 {"survey_text", render_numbered_section(*top)},
                                 {"paper_summary", summary_text}});
  GenerationRequest request{std::string(roles::kInsertionPoint),
                            summary.source_paper_id, 0, {{"user", insertion_prompt}}};
  decision.insertion_sentence_id = pick_insertion_sentence(
      ctx.generator.generate(request), *top, decision.insertion_fallback);
  return decision;
}

YesNo parse_yes_no(std::string_view text) {
  const std::string l = lower(strip_reasoning(text));
  const bool yes = has_word(l, "yes");
  const bool no = has_word(l, "no");
  if (yes == no) return YesNo::kUnparsed;
  return yes ? YesNo::kYes : YesNo::kNo;
}

TableRoutingDecision run_table_routing(const AgentContext& ctx,
                                       const PaperSummary& summary,
                                       const StructuredOutline& outline,
                                       const SurveyDocument& doc) {
  if (!outline.approved) {
    throw Error(ErrorKind::kPrecondition, "table routing needs an approved outline");
  }
  TableRoutingDecision decision;
  const std::string summary_text = summary.render();
  for (const auto& entry : outline.table_entries) {
    const SurveyTable* table = doc.find_table(entry.id);
    if (!table) continue;
    const std::string prompt = prompts::render(
        prompts::kTableRouting, {{"survey_topic", ctx.survey_topic},
                                 {"table_title", entry.title},
                                 {"table_description", describe_table(entry, *table)},
                                 {"paper_summary", summary_text}});
    GenerationRequest request{table_routing_role(entry.id),
                              summary.source_paper_id, 0, {{"user", prompt}}};
    const YesNo answer = parse_yes_no(ctx.generator.generate(request));
    decision.answers.emplace_back(entry.id, answer);
    if (answer == YesNo::kYes && !decision.table_id) decision.table_id = entry.id;
  }
  return decision;
}

std::string parse_text_synthesis(std::string_view text) {
  std::string body = trim(strip_reasoning(text));
  static constexpr std::string_view kLabel = "continuation paragraph:";
  if (lower(body.substr(0, kLabel.size())) == kLabel) {
    body = trim(std::string_view(body).substr(kLabel.size()));
  }
  if (body.empty()) throw Error(ErrorKind::kParse, "empty paragraph");
  std::size_t pos = 0;
  bool first_line = true;
  bool previous_blank = false;
  bool seen_text = false;
  while (pos <= body.size()) {
    auto eol = body.find('\n', pos);
    if (eol == std::string::npos) eol = body.size();
    const std::string line = trim(std::string_view(body).substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty()) {
      previous_blank = true;
      continue;
    }
    if (previous_blank && seen_text) {
      throw Error(ErrorKind::kParse, "output contains more than one paragraph");
    }
    if (line[0] == '#') throw Error(ErrorKind::kParse, "output contains a header line");
    if (first_line && line.size() > 4 && line.rfind("**", 0) == 0 &&
        line.compare(line.size() - 2, 2, "**") == 0) {
      throw Error(ErrorKind::kParse, "output starts with a bold header line");
    }
    first_line = false;
    seen_text = true;
    previous_blank = false;
  }
  return normalize_whitespace(body);
}

TextDraft run_text_synthesis(const AgentContext& ctx,
                             const std::string& section_text,
                             const PaperSummary& summary) {
  const std::string prompt = prompts::render(
      prompts::kTextSynthesis,
      {{"survey_text", section_text}, {"new_paper_summary", summary.render()}});
  TextDraft draft;
  draft.text = call_with_retries(
      ctx, roles::kTextSynthesis, summary.source_paper_id, prompt,
      ErrorKind::kAgent, "synthesis format error",
      [](const std::string& out) { return parse_text_synthesis(out); });
  draft.placeholder_count = count_placeholders(draft.text);
  return draft;
}

std::string describe_schema_fields(const SurveyTable& table) {
  std::string out;
  for (const auto& col : table.schema) {
    out += "- " + col.name + ": ";
    switch (col.kind) {
      case ColumnKind::kCategorical:
        for (std::size_t i = 0; i < col.allowed.size(); ++i) {
          if (i > 0) {
            out += col.allowed.size() == 2 ? " or "
                   : i + 1 == col.allowed.size() ? ", or "
                                                 : ", ";
          }
          out += "\"" + col.allowed[i] + "\"";
        }
        break;
      case ColumnKind::kInteger:
        out += std::to_string(col.min) + "-" + std::to_string(col.max) + " " +
               (col.description.empty() ? "integer" : col.description);
        break;
      case ColumnKind::kText:
        out += col.description.empty() ? "free text" : col.description;
        break;
    }
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

TableRow run_table_synthesis(const AgentContext& ctx, const SurveyTable& table,
                             const PaperSummary& summary) {
  if (table.schema.empty()) {
    throw Error(ErrorKind::kPrecondition,
                "table '" + table.id + "' has no columns to synthesize");
  }
  const std::string prompt = prompts::render(
      prompts::kTableSynthesis, {{"table_subject", table.title},
                                 {"field_list", describe_schema_fields(table)},
                                 {"paper_summary", summary.render()}});
  return call_with_retries(
      ctx, roles::kTableSynthesis, summary.source_paper_id, prompt,
      ErrorKind::kSchema, "table synthesis error", [&](const std::string& out) {
        return row_from_json(table, parse_lenient_json(out, JsonShape::kObject));
      });
}

}  // namespace livesurvey
