#include "livesurvey/benchmark.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "livesurvey/diff.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/lenient_json.hpp"
#include "livesurvey/prompts.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

const std::regex& citation_marker() {
  static const std::regex re(R"(\[(\d+(?:\s*,\s*\d+)*)\])");
  return re;
}

struct SpanLocation {
  std::string section_id;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
};

std::vector<SpanLocation> locate_span(const SurveyDocument& doc,
                                      const SpanAnnotation& span) {
  const std::string target = normalize_whitespace(span.text);
  std::vector<SpanLocation> hits;
  if (target.empty()) return hits;
  for (const auto& section : doc.sections) {
    if (!span.section_id.empty() && section.id != span.section_id) continue;
    const auto& ss = section.sentences;
    for (std::size_t i = 0; i < ss.size(); ++i) {
      std::string joined;
      for (std::size_t j = i; j < ss.size() && joined.size() < target.size(); ++j) {
        if (!joined.empty()) joined.push_back(' ');
        joined += ss[j].text;
        if (joined == target) hits.push_back({section.id, i, j + 1});
      }
    }
  }
  return hits;
}

std::string paper_representation(const PaperRecord& paper) {
  if (paper.abstract.empty()) return paper.title;
  if (paper.title.empty()) return paper.abstract;
  return paper.title + "\n\n" + paper.abstract;
}

StepResult baseline_step(Method method, const SurveyDocument& doc,
                         const LatePaper& late, TextGenerator& generator,
                         const StructuredOutline& outline) {
  StepResult step;
  step.method = method;
  step.paper_id = late.paper.id;
  step.gold = late.span;
  step.paper_repr = paper_representation(late.paper);
  step.before = doc;
  step.after = doc;

  std::map<std::string, std::string> values{
      {"survey_json", compact_document_json(doc)},
      {"paper_title", late.paper.title},
      {"paper_abstract", late.paper.abstract},
      {"paper_text", late.paper.full_text}};
  std::string_view tmpl = prompts::kOneStepUpdate;
  std::string role(roles::kOneStep);
  if (method == Method::kOracle) {
    tmpl = prompts::kOracleUpdate;
    role = std::string(roles::kOracle);
    values["target_section_id"] = late.span.section_id;
    const auto* entry = outline.find_section(late.span.section_id);
    values["target_section_title"] = entry ? entry->section_title : "";
  }
  try {
    GenerationRequest request{role, late.paper.id, 0,
                              {{"user", prompts::render(tmpl, values)}}};
    const std::string output = generator.generate(request);
    SurveyDocument next = document_from_json(parse_lenient_json(output, JsonShape::kObject));
    for (auto& section : next.sections) {
      for (auto& sentence : section.sentences) {
        if (count_placeholders(sentence.text) == 0) continue;
        auto res = resolve_citations(sentence.text, {late.paper.bib}, next);
        sentence.text = std::move(res.text);
        next.references = std::move(res.references);
      }
    }
    validate_document(next);
    step.after = std::move(next);
  } catch (const Error& e) {
    step.failed = true;
    step.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return step;
}

std::vector<StepResult> run_baseline(Method method, const BenchmarkInstance& instance,
                                     TextGenerator& generator) {
  std::vector<StepResult> results;
  SurveyDocument doc = instance.early_document;
  for (const auto& late : instance.late_papers) {
    results.push_back(baseline_step(method, doc, late, generator, instance.outline));
    doc = results.back().after;
  }
  return results;
}

}  // namespace

std::vector<SpanAnnotation> spans_from_json(const nlohmann::json& j) {
  const nlohmann::json& list = j.is_object() && j.contains("spans") ? j.at("spans") : j;
  if (!list.is_array()) throw Error(ErrorKind::kParse, "span annotations must be an array");
  std::vector<SpanAnnotation> spans;
  for (const auto& item : list) {
    SpanAnnotation s;
    try {
      s.paper_id = item.at("paper_id").get<std::string>();
      if (auto sec = item.find("section_id"); sec != item.end() && !sec->is_null()) {
        s.section_id = sec->is_string() ? sec->get<std::string>() : sec->dump();
      }
      s.text = item.at("text").get<std::string>();
      if (auto t = item.find("table_id"); t != item.end() && !t->is_null()) {
        s.table_id = t->is_string() ? t->get<std::string>() : t->dump();
      }
      if (auto r = item.find("row"); r != item.end() && !r->is_null()) s.row = *r;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, std::string("malformed span annotation: ") + e.what());
    }
    if (s.row && !s.table_id) {
      throw Error(ErrorKind::kParse, "span for '" + s.paper_id + "' has a row but no table_id");
    }
    spans.push_back(std::move(s));
  }
  return spans;
}

SurveyState BenchmarkInstance::early_state() const {
  return SurveyState(early_document, outline, name + "/early");
}

std::string renumber_citations(std::string_view text,
                               const std::map<std::uint64_t, std::uint64_t>& map) {
  std::string out;
  const std::string s(text);
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), citation_marker());
       it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out.append(s, last, static_cast<std::size_t>(m.position(0)) - last);
    std::string body = m[1].str();
    std::string rebuilt = "[";
    std::size_t pos = 0;
    bool first = true;
    while (pos < body.size()) {
      auto digits = body.find_first_of("0123456789", pos);
      if (digits == std::string::npos) break;
      auto end = body.find_first_not_of("0123456789", digits);
      if (end == std::string::npos) end = body.size();
      const std::uint64_t n = std::stoull(body.substr(digits, end - digits));
      auto mapped = map.find(n);
      if (mapped == map.end()) {
        throw Error(ErrorKind::kIntegrity, "citation [" + std::to_string(n) +
                                               "] has no surviving reference");
      }
      if (!first) rebuilt += ", ";
      rebuilt += std::to_string(mapped->second);
      first = false;
      pos = end;
    }
    out += rebuilt + "]";
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(s, last);
  return out;
}

BenchmarkInstance build_instance(std::string name, const SurveyState& full,
                                 const std::vector<SpanAnnotation>& spans,
                                 const std::vector<PaperRecord>& late_papers,
                                 std::vector<PaperRecord> out_of_scope) {
  BenchmarkInstance inst;
  inst.name = std::move(name);
  inst.outline = full.outline();
  inst.out_of_scope = std::move(out_of_scope);
  SurveyDocument doc = full.document();

  std::map<std::string, const PaperRecord*> by_id;
  for (const auto& p : late_papers) by_id[p.id] = &p;
  for (const auto& p : inst.out_of_scope) {
    if (by_id.contains(p.id)) {
      throw Error(ErrorKind::kIntegrity,
                  "paper '" + p.id + "' is both late and out of scope");
    }
  }

  // Locate everything against the full survey first so spans cannot shift.
  std::map<std::string, std::set<std::size_t>> drop_sentences;
  std::map<std::string, std::vector<std::size_t>> drop_rows;
  std::set<std::string> drop_keys;
  std::set<std::string> seen_papers;
  for (const auto& span : spans) {
    auto paper = by_id.find(span.paper_id);
    if (paper == by_id.end()) {
      throw Error(ErrorKind::kIntegrity,
                  "span names paper '" + span.paper_id + "' that is not in the late feed");
    }
    if (!seen_papers.insert(span.paper_id).second) {
      throw Error(ErrorKind::kIntegrity, "late paper '" + span.paper_id + "' has two spans");
    }
    const auto hits = locate_span(doc, span);
    if (hits.size() != 1) {
      throw Error(ErrorKind::kIntegrity,
                  "span of late paper '" + span.paper_id + "' " +
                      (hits.empty() ? "was not found" : "is ambiguous") + " in the survey");
    }
    const auto& loc = hits.front();
    const Section* section = doc.find_section(loc.section_id);
    GroundTruthSpan gold;
    gold.paper_id = span.paper_id;
    gold.section_id = loc.section_id;
    gold.text = normalize_whitespace(span.text);
    for (std::size_t i = loc.begin; i < loc.end; ++i) {
      if (!drop_sentences[loc.section_id].insert(i).second) {
        throw Error(ErrorKind::kIntegrity,
                    "span of late paper '" + span.paper_id + "' overlaps another span");
      }
      gold.sentence_ids.push_back(section->sentences[i].id);
    }
    if (span.table_id) {
      const SurveyTable* table = doc.find_table(*span.table_id);
      if (!table) {
        throw Error(ErrorKind::kIntegrity, "span of late paper '" + span.paper_id +
                                               "' names unknown table '" + *span.table_id + "'");
      }
      gold.table_id = span.table_id;
      if (span.row) {
        TableRow row = row_from_json(*table, *span.row);
        auto it = std::find(table->rows.begin(), table->rows.end(), row);
        if (it == table->rows.end()) {
          throw Error(ErrorKind::kIntegrity, "row of late paper '" + span.paper_id +
                                                 "' is not in table '" + table->id + "'");
        }
        drop_rows[table->id].push_back(static_cast<std::size_t>(it - table->rows.begin()));
        gold.gold_row = std::move(row);
      }
    }
    const std::string& key = paper->second->bib.key;
    if (!doc.find_reference(key)) {
      throw Error(ErrorKind::kIntegrity, "late paper '" + span.paper_id +
                                             "' has no reference entry '" + key + "'");
    }
    drop_keys.insert(key);
    inst.late_papers.push_back({*paper->second, std::move(gold)});
  }
  for (const auto& p : late_papers) {
    if (!seen_papers.contains(p.id)) {
      throw Error(ErrorKind::kIntegrity, "late paper '" + p.id + "' has no span annotation");
    }
  }

  std::map<std::uint64_t, std::uint64_t> renumber;
  std::vector<Reference> kept;
  for (const auto& ref : doc.references) {
    if (drop_keys.contains(ref.key)) continue;
    Reference r = ref;
    r.number = kept.size() + 1;
    renumber[ref.number] = r.number;
    kept.push_back(std::move(r));
  }
  doc.references = std::move(kept);
  for (auto& section : doc.sections) {
    const auto& drops = drop_sentences[section.id];
    std::vector<Sentence> remaining;
    for (std::size_t i = 0; i < section.sentences.size(); ++i) {
      if (drops.contains(i)) continue;
      Sentence s = section.sentences[i];
      try {
        s.text = renumber_citations(s.text, renumber);
      } catch (const Error& e) {
        throw Error(ErrorKind::kIntegrity, "sentence " + s.id + ": " + e.what());
      }
      remaining.push_back(std::move(s));
    }
    section.sentences = std::move(remaining);
  }
  for (auto& [table_id, rows] : drop_rows) {
    SurveyTable* table = doc.find_table(table_id);
    std::sort(rows.rbegin(), rows.rend());
    for (auto idx : rows) table->rows.erase(table->rows.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  validate_document(doc);
  inst.early_document = std::move(doc);
  return inst;
}

BenchmarkInstance load_instance(const std::filesystem::path& instance_file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(instance_file));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, instance_file.string() + ": " + e.what());
  }
  const auto base = instance_file.parent_path();
  auto path_of = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw Error(ErrorKind::kConfig, instance_file.string() + ": missing '" + key + "' path");
    }
    return base / j[key].get<std::string>();
  };
  SurveyState full(load_document(path_of("survey")), load_outline(path_of("outline")),
                   "full");
  auto spans = spans_from_json(nlohmann::json::parse(read_file(path_of("spans"))));
  CandidateFilter any;
  auto late = ingest_feed(path_of("late_feed"), any);
  std::vector<PaperRecord> oos;
  if (j.contains("out_of_scope_feed")) oos = ingest_feed(path_of("out_of_scope_feed"), any);
  return build_instance(j.value("name", instance_file.stem().string()), full, spans, late,
                        std::move(oos));
}

const char* to_string(Method method) {
  switch (method) {
    case Method::kFramework: return "framework";
    case Method::kOneStep: return "one_step";
    case Method::kOracle: return "oracle";
  }
  return "framework";
}

Method method_from_string(std::string_view name) {
  if (name == "framework") return Method::kFramework;
  if (name == "one_step" || name == "one-step") return Method::kOneStep;
  if (name == "oracle") return Method::kOracle;
  throw Error(ErrorKind::kConfig, "unknown method '" + std::string(name) +
                                      "' (expected framework, one_step or oracle)");
}

std::vector<StepResult> run_framework_stream(const BenchmarkInstance& instance,
                                             TextGenerator& generator, const Clock& clock) {
  std::vector<StepResult> results;
  SurveyState state = instance.early_state();
  UpdateContext ctx{generator, clock};
  auto step = [&](const PaperRecord& paper, std::optional<GroundTruthSpan> gold) {
    StepResult r;
    r.method = Method::kFramework;
    r.paper_id = paper.id;
    r.out_of_scope = !gold.has_value();
    r.gold = std::move(gold);
    r.paper_repr = paper_representation(paper);
    r.before = state.document();
    UpdateResult out = apply_update(state, paper, ctx);
    r.abstained = out.record.decision == UpdateDecision::kAbstained;
    r.failed = out.record.decision == UpdateDecision::kFailed;
    if (r.failed) r.error = out.record.error_kind + ": " + out.record.error;
    r.after = out.state.document();
    r.record = std::move(out.record);
    state = std::move(out.state);
    results.push_back(std::move(r));
  };
  for (const auto& late : instance.late_papers) step(late.paper, late.span);
  for (const auto& paper : instance.out_of_scope) step(paper, std::nullopt);
  return results;
}

std::vector<StepResult> run_one_step_baseline(const BenchmarkInstance& instance,
                                              TextGenerator& generator) {
  return run_baseline(Method::kOneStep, instance, generator);
}

std::vector<StepResult> run_oracle_baseline(const BenchmarkInstance& instance,
                                            TextGenerator& generator) {
  return run_baseline(Method::kOracle, instance, generator);
}

std::string compact_document_json(const SurveyDocument& doc) {
  nlohmann::ordered_json j = document_to_json(doc);
  for (auto& s : j["sections"]) {
    s.erase("sentences");
    s.erase("next_sentence");
  }
  return j.dump(2);
}

StepEvaluation evaluate_step(const std::string& survey, const StepResult& step,
                             const MetricSettings& settings, Embedder* embedder) {
  StepEvaluation ev;
  ev.survey = survey;
  ev.method = step.method;
  ev.paper_id = step.paper_id;
  ev.late = step.gold.has_value();
  ev.failed = step.failed;
  ev.out_of_scope = step.out_of_scope;
  ev.abstained = step.abstained;

  const auto u = new_sentences(step.before, step.after);
  ev.u_size = u.size();
  std::vector<std::string> u_texts;
  for (const auto& s : u) u_texts.push_back(s.sentence.text);
  std::string u_text;
  for (const auto& t : u_texts) u_text += (u_text.empty() ? "" : " ") + t;

  if (ev.late && !u.empty()) {
    ev.bleu4 = bleu_4(u_text, step.gold->text);
    ev.rouge_l_f = rouge_l(u_text, step.gold->text, settings.rouge_beta);
  }
  if (embedder && !u.empty()) {
    try {
      if (ev.late) ev.bert_sim = bert_similarity(u_text, step.gold->text, *embedder);
      ev.semantic_align = semantic_alignment(u_texts, step.paper_repr, *embedder);
      ev.local_coherence = local_coherence(u, step.after, settings.coherence_k, *embedder);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEvaluation) throw;
      ev.bert_sim.reset();
      ev.semantic_align.reset();
      ev.local_coherence.reset();
      ev.embedding_error = e.what();
    }
  }

  const EditScript script = token_diff(step.before, step.after);
  ev.delta_tokens = delta_tokens(script);
  std::set<std::string> scope;
  if (step.method == Method::kFramework) {
    if (step.record && step.record->routed_section) {
      scope.insert(section_region(*step.record->routed_section));
      if (step.record->inserted_row) scope.insert(table_region(*step.record->routed_table));
    }
  } else if (ev.late) {
    scope.insert(section_region(step.gold->section_id));
    if (step.gold->table_id) scope.insert(table_region(*step.gold->table_id));
  }
  ev.delta_out = delta_out(script, scope);

  if (step.method == Method::kFramework && ev.late && step.record) {
    const UpdateRecord& rec = *step.record;
    RoutingOutcome outcome{rec.ranked_sections, step.gold->section_id};
    ev.routing_hit1 = routing_hit(outcome, 1);
    ev.routing_hit3 = routing_hit(outcome, 3);
    if (step.gold->table_id) {
      std::vector<std::string> yes;
      for (const auto& [id, answer] : rec.table_answers) {
        if (answer == "yes") yes.push_back(id);
      }
      RoutingOutcome table_outcome{yes, *step.gold->table_id};
      ev.table_hit1 = routing_hit(table_outcome, 1);
      ev.table_hit3 = routing_hit(table_outcome, 3);
    }
    if (step.gold->gold_row && rec.inserted_row) {
      ev.table_exact = table_fidelity(*rec.inserted_row, *step.gold->gold_row, nullptr,
                                      settings.fidelity_tau)
                           .exact_match;
      if (embedder) {
        try {
          ev.table_fidelity = table_fidelity(*rec.inserted_row, *step.gold->gold_row,
                                             embedder, settings.fidelity_tau)
                                  .fidelity;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kEvaluation) throw;
          ev.embedding_error = e.what();
        }
      }
    }
  }
  return ev;
}

}  // namespace livesurvey
