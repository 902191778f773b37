#include <algorithm>

#include "doctest.h"
#include "livesurvey/agents.hpp"
#include "livesurvey/diff.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/update.hpp"
#include "synthetic.hpp"

using namespace livesurvey;

namespace {
const std::filesystem::path kData = LIVESURVEY_TEST_DATA;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

SurveyState base_state() {
  return SurveyState(load_document(kData / "survey.json"), load_outline(kData / "outline.json"),
                     "epoch-1");
}

PaperRecord feed_paper(const std::string& id) {
  for (auto& p : ingest_feed(kData / "feed.ndjson", CandidateFilter{})) {
    if (p.id == id) return p;
  }
  FAIL("paper missing from feed");
  return {};
}

std::string fixed_clock() { return "2026-01-01T00:00:00Z"; }

void script_included(ScriptedGenerator& gen, const std::string& id, const std::string& paragraph,
                     const std::string& insertion, const std::string& table_answer_1 = "No") {
  gen.add("analysis", id, synth::analysis_output(id));
  gen.add("abstention", id, "TRUE");
  gen.add("section_routing", id, R"(["3", "2", "1"])");
  gen.add("insertion_point", id, insertion);
  gen.add(table_routing_role("1"), id, table_answer_1);
  gen.add(table_routing_role("2"), id, "No");
  gen.add("text_synthesis", id, paragraph);
}

// Every sentence of `before` survives unchanged, in order, in `after`.
bool insertion_only(const SurveyDocument& before, const SurveyDocument& after) {
  for (const auto& s : before.sections) {
    const Section* t = after.find_section(s.id);
    if (!t || t->title != s.title) return false;
    std::size_t j = 0;
    for (const auto& sent : s.sentences) {
      while (j < t->sentences.size() && t->sentences[j].id != sent.id) ++j;
      if (j == t->sentences.size() || t->sentences[j].text != sent.text) return false;
    }
  }
  for (const auto& tb : before.tables) {
    const SurveyTable* ta = after.find_table(tb.id);
    if (!ta || ta->rows.size() < tb.rows.size() ||
        !std::equal(tb.rows.begin(), tb.rows.end(), ta->rows.begin())) {
      return false;
    }
  }
  return std::equal(before.references.begin(), before.references.end(), after.references.begin());
}
}  // namespace

TEST_CASE("paragraph insertion splices fresh ids after the anchor") {
  const auto doc = load_document(kData / "survey.json");
  const Section& sec = *doc.find_section("3");
  std::vector<std::string> ids;
  const auto out = insert_paragraph(sec, "3:3", "First new one. Second new one.", &ids);
  CHECK(ids == std::vector<std::string>{"3:7", "3:8"});
  REQUIRE(out.sentences.size() == sec.sentences.size() + 2);
  CHECK(out.sentences[3].id == "3:7");
  CHECK(out.sentences[4].text == "Second new one.");
  CHECK(out.sentences[5] == sec.sentences[3]);
  CHECK(out.next_sentence == 9);
  const auto appended = insert_paragraph(sec, "append", "Tail.", nullptr);
  CHECK(appended.sentences.back().text == "Tail.");
  CHECK(kind_of([&] { insert_paragraph(sec, "3:99", "X.", nullptr); }) == ErrorKind::kPrecondition);
}

TEST_CASE("a new key after 57 references becomes [58]") {
  SurveyDocument doc;
  for (int i = 1; i <= 57; ++i) doc.references.push_back({"k" + std::to_string(i), {}, std::uint64_t(i)});
  BibEntry bib;
  bib.key = "fresh";
  const auto r = resolve_citations("X improves Y [cite]. It also helps [cite].", {bib}, doc);
  CHECK(r.text == "X improves Y [58]. It also helps [58].");
  CHECK(r.references.size() == 58);
  CHECK(r.references.back().number == 58);
  REQUIRE(r.new_reference.has_value());
  CHECK(r.new_reference->key == "fresh");
  CHECK(r.added == 1);
}

TEST_CASE("a known key reuses its number and adds nothing") {
  const auto doc = load_document(kData / "survey.json");
  const Reference& yolo = doc.references[7];
  BibEntry bib;
  bib.key = yolo.key;
  const auto r = resolve_citations("Again [cite].", {bib}, doc);
  CHECK(r.text == "Again [" + std::to_string(yolo.number) + "].");
  CHECK(r.references == doc.references);
  CHECK_FALSE(r.new_reference.has_value());
}

TEST_CASE("several bib entries map positionally") {
  const auto doc = load_document(kData / "survey.json");
  BibEntry a, b;
  a.key = "a";
  b.key = "b";
  const auto r = resolve_citations("[cite] and [cite].", {a, b}, doc);
  CHECK(r.text == "[11] and [12].");
  CHECK(r.keys == std::vector<std::string>{"a", "b"});
  CHECK(kind_of([&] { resolve_citations("[cite] [cite] [cite]", {a, b}, doc); }) ==
        ErrorKind::kCitation);
}

TEST_CASE("an included paper is woven into text, table and references") {
  const auto state = base_state();
  const std::string before_bytes = serialize_document(state.document());
  ScriptedGenerator gen(1);
  script_included(gen, "f1", "Sparse DETR [cite] keeps only salient encoder tokens. It is faster.",
                  "Insert after 3:3.", "Yes");
  gen.add("table_synthesis", "f1", R"({"Method": "Sparse DETR", "Stage": "One-stage", "Year": 2023})");
  const auto result = apply_update(state, feed_paper("f1"), {gen, fixed_clock});
  const auto& rec = result.record;
  CHECK(rec.decision == UpdateDecision::kUpdated);
  CHECK(rec.routed_section == std::optional<std::string>("3"));
  CHECK(rec.routed_table == std::optional<std::string>("1"));
  CHECK(rec.inserted_sentence_ids == std::vector<std::string>{"3:7", "3:8"});
  CHECK(rec.final_text.find("[11]") != std::string::npos);
  CHECK(rec.started_at == fixed_clock());

  const auto& doc = result.state.document();
  CHECK(doc.find_section("3")->sentences[3].text ==
        "Sparse DETR [11] keeps only salient encoder tokens.");
  CHECK(doc.find_table("1")->rows.size() == state.document().find_table("1")->rows.size() + 1);
  CHECK(doc.references.back().key == "roh2023sparse");
  CHECK(insertion_only(state.document(), doc));
  CHECK_NOTHROW(validate_document(doc));

  const auto script = token_diff(state.document(), doc);
  CHECK(rec.delta_tokens == delta_tokens(script));
  CHECK(rec.delta_out == 0);
  // The input state is a value and stays as it was.
  CHECK(serialize_document(state.document()) == before_bytes);
  CHECK(&result.state.outline() == &state.outline());
}

TEST_CASE("abstention leaves the document byte-identical") {
  const auto state = base_state();
  ScriptedGenerator gen(1);
  gen.add("analysis", "f2", synth::analysis_output("f2"));
  gen.add("abstention", "f2", "FALSE");
  const auto result = apply_update(state, feed_paper("f2"), {gen, fixed_clock});
  CHECK(result.record.decision == UpdateDecision::kAbstained);
  CHECK(serialize_document(result.state.document()) == serialize_document(state.document()));
  CHECK(gen.calls().size() == 2);
}

TEST_CASE("a failing synthesis leaves the state unchanged and records the error") {
  const auto state = base_state();
  ScriptedGenerator gen(1);
  script_included(gen, "f3", "One.\n\nTwo.", "append");
  gen.add("text_synthesis", "f3", 1, "# Header\nText.");
  const auto result = apply_update(state, feed_paper("f3"), {gen, fixed_clock});
  CHECK(result.record.decision == UpdateDecision::kFailed);
  CHECK(result.record.error_kind == "agent");
  CHECK(result.record.summary.has_value());
  CHECK_FALSE(result.record.routed_section.has_value());
  CHECK(result.state.document() == state.document());
}

TEST_CASE("a paragraph without placeholders is flagged but applied") {
  const auto state = base_state();
  ScriptedGenerator gen(1);
  script_included(gen, "f4", "RT-DETR runs in real time.", "gibberish");
  const auto result = apply_update(state, feed_paper("f4"), {gen, fixed_clock});
  CHECK(result.record.decision == UpdateDecision::kUpdated);
  CHECK(result.record.has_flag(flags::kNoPlaceholder));
  CHECK(result.record.has_flag(flags::kInsertionFallback));
  CHECK(result.state.document().find_section("3")->sentences.back().text ==
        "RT-DETR runs in real time.");
  CHECK(result.state.document().references.size() == state.document().references.size());
}

TEST_CASE("updates need an approved outline") {
  auto outline = load_outline(kData / "outline.json");
  outline.approved = false;
  SurveyState state(load_document(kData / "survey.json"), outline, "e");
  ScriptedGenerator gen(1);
  CHECK(kind_of([&] { apply_update(state, feed_paper("f1"), {gen, fixed_clock}); }) ==
        ErrorKind::kPrecondition);
  CHECK(gen.calls().empty());
}

TEST_CASE("a synthetic stream obeys every update invariant and replays") {
  const auto survey = synth::make_survey(99, 4, 2, 24);
  SurveyState state(survey.doc, survey.outline, "epoch");
  ScriptedGenerator gen(1);
  const auto plan = synth::plan_stream(survey, 40, 5);
  const auto log = std::filesystem::temp_directory_path() / "livesurvey_test_audit.ndjson";
  std::filesystem::remove(log);
  std::size_t updated = 0;
  std::vector<UpdateRecord> produced;
  for (const auto& p : plan) {
    synth::script(gen, survey, p);
    const auto before = state.document();
    auto result = apply_update(state, p.paper, {gen, fixed_clock});
    const auto& rec = result.record;
    using synth::Kind;
    switch (p.kind) {
      case Kind::kAbstain:
      case Kind::kParseAbstain:
        CHECK(rec.decision == UpdateDecision::kAbstained);
        CHECK(rec.parse_abstain == (p.kind == Kind::kParseAbstain));
        break;
      case Kind::kAgentFail:
        CHECK(rec.decision == UpdateDecision::kFailed);
        break;
      default:
        CHECK(rec.decision == UpdateDecision::kUpdated);
        CHECK(rec.routed_section == std::optional<std::string>(p.section));
        CHECK(rec.insertion_fallback == (p.kind == Kind::kFallback));
        CHECK(rec.has_flag(flags::kTableFailed) == (p.kind == Kind::kTableFail));
        CHECK(rec.inserted_row.has_value() == (p.kind == Kind::kTextTable));
        CHECK(rec.delta_out == 0);
        ++updated;
    }
    CHECK(insertion_only(before, result.state.document()));
    CHECK(replay_update(before, rec) == result.state.document());
    append_audit(log, rec);
    produced.push_back(rec);
    state = result.state;
  }
  CHECK(updated == 28);
  const auto records = read_audit(log);
  REQUIRE(records.size() == plan.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(record_to_json(records[i]) == record_to_json(produced[i]));
  }
  SurveyDocument doc = survey.doc;
  for (const auto& r : records) doc = replay_update(doc, r);
  CHECK(doc == state.document());
  std::filesystem::remove(log);
}

TEST_CASE("replay refuses a record that does not fit") {
  const auto state = base_state();
  ScriptedGenerator gen(1);
  script_included(gen, "f1", "A [cite].", "append");
  const auto rec = apply_update(state, feed_paper("f1"), {gen, fixed_clock}).record;
  auto moved = rec;
  moved.routed_section = "9";
  CHECK(kind_of([&] { replay_update(state.document(), moved); }) == ErrorKind::kIntegrity);
}

TEST_CASE("publish writes the canonical serialization") {
  const auto state = base_state();
  const auto out = std::filesystem::temp_directory_path() / "livesurvey_test_publish.json";
  publish(state, out);
  CHECK(read_file(out) == serialize_document(state.document()));
  std::filesystem::remove(out);
}
