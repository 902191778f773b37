// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "livesurvey/benchmark.hpp"
#include "livesurvey/diff.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/metrics.hpp"
#include "livesurvey/text.hpp"
#include "livesurvey/update.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace livesurvey;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;    // measured values
  std::vector<std::string> why;  // failed expectations

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (why.size() < 5) why.push_back(what);
    }
  }
  std::string report() const {
    std::string out = detail.str();
    for (const auto& w : why) out += " | " + w;
    return out;
  }
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol + 1e-12; }

double mean(const std::vector<double>& v) {
  std::vector<GroupedValue> g;
  for (std::size_t i = 0; i < v.size(); ++i) g.push_back({"s" + std::to_string(i), v[i]});
  return *aggregate(g).macro;
}

// ---------------------------------------------------------------------------
// Mock benchmark shared by the stream criteria.

struct MockBenchmark {
  synth::Survey survey;
  BenchmarkInstance instance;
  std::vector<synth::Planned> plans;  // late papers first, then out of scope
};

MockBenchmark make_mock_benchmark(std::uint32_t seed, int late, int out_of_scope) {
  MockBenchmark b;
  b.survey = synth::make_survey(seed, 5, 2, late + 5);
  std::vector<SpanAnnotation> spans(b.survey.spans.begin(), b.survey.spans.begin() + late);
  std::vector<PaperRecord> late_papers(b.survey.cited_papers.begin(),
                                       b.survey.cited_papers.begin() + late);
  std::mt19937 rng(seed * 7 + 1);
  std::vector<PaperRecord> oos;
  for (int i = 0; i < out_of_scope; ++i) {
    oos.push_back(synth::make_paper("oos" + std::to_string(i), "oos_key" + std::to_string(i), rng));
  }
  SurveyState full(b.survey.doc, b.survey.outline, "full");
  b.instance = build_instance("mock" + std::to_string(seed), full, spans, late_papers, oos);

  static const synth::Kind late_kinds[] = {
      synth::Kind::kText,      synth::Kind::kTextTable,    synth::Kind::kFallback,
      synth::Kind::kText,      synth::Kind::kRetryRouting, synth::Kind::kTextTable,
      synth::Kind::kTableFail, synth::Kind::kText,         synth::Kind::kParseAbstain,
      synth::Kind::kAgentFail};
  const auto& doc = b.instance.early_document;
  for (std::size_t i = 0; i < b.instance.late_papers.size(); ++i) {
    const auto& lp = b.instance.late_papers[i];
    synth::Planned p;
    p.paper = lp.paper;
    p.kind = late_kinds[i % 10];
    // Every sixth paper is deliberately misrouted.
    p.section = lp.span.section_id;
    if (i % 6 == 5) p.section = doc.sections[(i + 1) % doc.sections.size()].id;
    const Section* sec = doc.find_section(p.section);
    p.insertion = i % 3 == 0 ? std::string(kAppend) : sec->sentences[i % sec->sentences.size()].id;
    p.paragraph = std::regex_replace(lp.span.text, std::regex(R"(\[\d+\])"), "[cite]");
    if (p.kind == synth::Kind::kTextTable || p.kind == synth::Kind::kTableFail) {
      p.table = lp.span.table_id ? *lp.span.table_id : doc.tables[i % doc.tables.size()].id;
      p.row = lp.span.gold_row
                  ? nlohmann::json(row_to_json(*doc.find_table(*p.table), *lp.span.gold_row))
                  : synth::make_row(rng, "Late" + std::to_string(i), true);
      if (p.kind == synth::Kind::kTableFail) p.row["Kind"] = "Delta";
    }
    b.plans.push_back(std::move(p));
  }
  for (const auto& paper : b.instance.out_of_scope) {
    synth::Planned p;
    p.paper = paper;
    p.kind = synth::Kind::kAbstain;
    b.plans.push_back(std::move(p));
  }
  return b;
}

std::string fixed_clock() { return "2026-01-01T00:00:00Z"; }

// ---------------------------------------------------------------------------

void criterion_locality(Outcome& o) {
  auto b = make_mock_benchmark(11, 35, 15);
  ScriptedGenerator gen(1);
  for (const auto& p : b.plans) synth::script(gen, b.survey, p);
  const auto steps = run_framework_stream(b.instance, gen, fixed_clock);
  o.expect(steps.size() == 50, "expected 50 steps, got " + std::to_string(steps.size()));
  std::size_t updated = 0, abstained = 0, tables = 0, misrouted = 0, max_out = 0;
  for (const auto& s : steps) {
    const auto ev = evaluate_step(b.instance.name, s, MetricSettings{}, nullptr);
    max_out = std::max(max_out, ev.delta_out);
    if (s.record && s.record->decision == UpdateDecision::kUpdated) {
      ++updated;
      if (s.record->inserted_row) ++tables;
      if (s.gold && s.record->routed_section != s.gold->section_id) ++misrouted;
    }
    abstained += s.abstained;
    // Disruption is recomputed from the documents, never read back from the record.
    o.expect(ev.delta_out == 0, "step " + s.paper_id + " has dOut " + std::to_string(ev.delta_out));
  }
  o.expect(updated > 0 && abstained > 0 && tables > 0 && misrouted > 0,
           "stream does not mix updates, abstentions, table rows and misroutes");
  o.detail << "steps=" << steps.size() << " updated=" << updated
           << " abstained=" << abstained << " table_rows=" << tables << " misrouted=" << misrouted
           << " max_dOut=" << max_out;
}

void criterion_abstention(Outcome& o) {
  struct Row {
    const char* survey;
    int tp, tn, fp, fn;
    double published;
  };
  const Row rows[] = {{"Object Detection", 13, 28, 3, 1, 0.81},
                      {"Adversarial Attacks", 15, 29, 1, 0, 0.9375},
                      {"Remote Sensing SR", 23, 20, 1, 1, 0.9583},
                      {"Robotic Arms", 17, 61, 0, 0, 1.0},
                      {"Video Anomaly", 16, 62, 0, 0, 1.0}};
  for (const auto& r : rows) {
    AbstentionCounts c;
    c.tp = r.tp;
    c.tn = r.tn;
    c.fp = r.fp;
    c.fn = r.fn;
    const auto s = abstention_pr(c);
    const double p = s.precision.value_or(-1);
    o.expect(within(p, r.published, 0.005),
             std::string(r.survey) + " precision " + fmt(p) + " vs " + fmt(r.published));
    o.detail << (o.detail.tellp() > 0 ? " " : "") << fmt(p * 100, 2) << "%";
  }
}

void criterion_routing(Outcome& o) {
  const std::vector<double> sec1{0.89, 0.87, 0.90, 0.90, 0.92};
  const std::vector<double> sec3{0.94, 0.93, 0.95, 0.95, 0.97};
  const std::vector<double> tab1{0.72, 0.80, 0.93, 0.95, 0.93};
  const std::vector<double> tab3{0.87, 0.92, 0.97, 0.98, 0.98};
  const double s1 = mean(sec1), s3 = mean(sec3), t1 = mean(tab1), t3 = mean(tab3);
  o.expect(within(s1, 0.90, 0.005), "section top-1 " + fmt(s1) + " vs 0.90");
  o.expect(within(s3, 0.95, 0.005), "section top-3 " + fmt(s3) + " vs 0.95");
  o.expect(within(t1, 0.88, 0.005), "table top-1 " + fmt(t1) + " vs 0.88");
  o.expect(within(t3, 0.93, 0.005), "table top-3 " + fmt(t3) + " vs 0.93");
  o.detail << "section " << fmt(s1) << "/" << fmt(s3) << ", table "
           << fmt(t1) << "/" << fmt(t3);
}

void criterion_table_fidelity(Outcome& o) {
  const std::vector<std::pair<double, double>> fid_em{{0.91, 0.55}, {0.86, 0.62}, {0.90, 0.68},
                                                      {1.00, 0.50}, {0.88, 0.57}};
  const std::vector<int> n{11, 21, 132, 2, 14};
  // Sample weighting equals the micro mean over expanded per-sample values.
  std::vector<GroupedValue> fid, em;
  for (std::size_t i = 0; i < n.size(); ++i) {
    for (int k = 0; k < n[i]; ++k) {
      fid.push_back({"s" + std::to_string(i), fid_em[i].first});
      em.push_back({"s" + std::to_string(i), fid_em[i].second});
    }
  }
  const double f = *aggregate(fid).micro, e = *aggregate(em).micro;
  o.expect(fid.size() == 180, "sample total is not 180");
  o.expect(within(f, 0.90, 0.005), "fidelity " + fmt(f) + " vs 0.90");
  o.expect(within(e, 0.65, 0.005), "exact match " + fmt(e) + " vs 0.65");
  o.detail << "fidelity " << fmt(f) << ", EM " << fmt(e) << " over "
           << fid.size();
}

void criterion_table1_macro(Outcome& o) {
  const std::vector<std::vector<double>> rows{{7.74, 0.216, 0.867, 0.809, 0.787, 233.3},
                                              {4.83, 0.191, 0.855, 0.823, 0.792, 225.3},
                                              {2.22, 0.149, 0.849, 0.804, 0.777, 224.2},
                                              {4.98, 0.189, 0.862, 0.803, 0.775, 216.1},
                                              {1.61, 0.158, 0.847, 0.791, 0.787, 229.9}};
  const std::vector<double> avg{4.28, 0.181, 0.856, 0.806, 0.783, 225.8};
  const char* names[] = {"BLEU", "ROUGE", "BERT", "Align", "Coherence", "dTokens"};
  for (std::size_t c = 0; c < avg.size(); ++c) {
    std::vector<double> column;
    for (const auto& r : rows) column.push_back(r[c]);
    const double m = mean(column);
    o.expect(within(m, avg[c], 0.01), std::string(names[c]) + " " + fmt(m) + " vs " + fmt(avg[c], 3));
    o.detail << (o.detail.tellp() > 0 ? " " : "") << names[c] << "=" << fmt(m);
  }
}

void criterion_metric_oracles(Outcome& o) {
  std::mt19937 rng(31337);
  static const char* words[] = {"the", "a", "model", "detector", "improves", "accuracy",
                                "on", "COCO", ",", ".", "(", ")", "R-CNN", "fast", "3.5"};
  std::uniform_int_distribution<int> len(1, 18), pick(0, 14);
  auto sentence = [&] {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += std::string(words[pick(rng)]) + " ";
    return s;
  };
  double worst_rouge = 0, worst_bleu = 0;
  for (int i = 0; i < 200; ++i) {
    const auto c = sentence(), r = sentence();
    worst_rouge = std::max(worst_rouge, std::abs(rouge_l(c, r) - oracle::rouge_l_f1(c, r)));
    worst_bleu = std::max(worst_bleu, std::abs(bleu_4(c, r) - oracle::bleu4_add_one(c, r)));
  }
  o.expect(worst_rouge < 1e-9, "ROUGE-L error " + std::to_string(worst_rouge));
  o.expect(worst_bleu < 1e-9, "BLEU-4 error " + std::to_string(worst_bleu));
  o.detail << "200 pairs, max |err| rouge=" << worst_rouge
           << " bleu=" << worst_bleu;
}

SurveyDocument mutate(const SurveyDocument& doc, std::mt19937& rng) {
  SurveyDocument out = doc;
  for (auto& s : out.sections) {
    for (auto it = s.sentences.begin(); it != s.sentences.end();) {
      const auto roll = rng() % 10;
      if (roll == 0) {
        it = s.sentences.erase(it);
        continue;
      }
      if (roll == 1) it->text = synth::make_sentence(rng, false);
      if (roll == 2) {
        it = s.sentences.insert(it + 1, {s.id + ":" + std::to_string(s.next_sentence++),
                                         synth::make_sentence(rng, true)});
      }
      ++it;
    }
  }
  for (auto& t : out.tables) {
    if (!t.rows.empty() && rng() % 2 == 0) t.rows.erase(t.rows.begin());
    if (rng() % 2 == 0) t.rows.push_back(row_from_json(t, synth::make_row(rng, "Mut", true)));
  }
  return out;
}

void criterion_diff_and_baselines(Outcome& o) {
  std::mt19937 rng(4242);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const auto base = synth::make_survey(1000 + i, 3 + i % 3, 1 + i % 2, 6 + i % 10).doc;
    const auto a = mutate(base, rng);
    const auto b = mutate(base, rng);
    const auto ta = document_tokens(a), tb = document_tokens(b);
    const auto script = diff_streams(ta, tb);
    if (apply_edit_script(ta.tokens, script) != tb.tokens) ++failures;
  }
  o.expect(failures == 0, std::to_string(failures) + " of 100 round trips failed");

  auto bench = make_mock_benchmark(21, 20, 0);
  ScriptedGenerator gen(1);
  std::map<std::string, std::string> targets;
  for (auto& p : bench.plans) {
    p.kind = synth::Kind::kText;
    p.table.reset();
    synth::script(gen, bench.survey, p);
  }
  for (const auto& lp : bench.instance.late_papers) targets[lp.paper.id] = lp.span.section_id;
  synth::BaselineRewriter rewriter(targets, true);
  auto avg = [&](const std::vector<StepResult>& steps, bool out) {
    double total = 0;
    for (const auto& s : steps) {
      const auto ev = evaluate_step(bench.instance.name, s, MetricSettings{}, nullptr);
      total += static_cast<double>(out ? ev.delta_out : ev.delta_tokens);
    }
    return total / static_cast<double>(steps.size());
  };
  const auto fw = run_framework_stream(bench.instance, gen, fixed_clock);
  const auto os = run_one_step_baseline(bench.instance, rewriter);
  const double fw_tok = avg(fw, false), fw_out = avg(fw, true);
  const double os_tok = avg(os, false), os_out = avg(os, true);
  o.expect(os_tok > fw_tok, "baseline dTokens not above framework");
  o.expect(os_out > fw_out, "baseline dOut not above framework");
  o.detail << "100 round trips ok=" << 100 - failures
           << "; framework dTokens/dOut " << fmt(fw_tok, 1) << "/" << fmt(fw_out, 1)
           << " vs rewrite baseline " << fmt(os_tok, 1) << "/" << fmt(os_out, 1);
}

struct StreamRun {
  std::vector<SurveyState> states;  // state before each step, plus the final one
  std::vector<UpdateRecord> records;
};

StreamRun run_stream(std::uint32_t seed, int steps) {
  const auto survey = synth::make_survey(seed, 4, 2, 20);
  ScriptedGenerator gen(1);
  StreamRun run;
  SurveyState state(survey.doc, survey.outline, "epoch");
  for (const auto& p : synth::plan_stream(survey, steps, seed)) {
    synth::script(gen, survey, p);
    run.states.push_back(state);
    auto result = apply_update(state, p.paper, {gen, fixed_clock});
    run.records.push_back(result.record);
    state = result.state;
  }
  run.states.push_back(state);
  return run;
}

void criterion_algorithm(Outcome& o) {
  std::size_t abstains = 0, texts = 0, rows = 0, table_failures = 0;
  for (std::uint32_t seed : {1u, 2u, 3u}) {
    const auto run = run_stream(seed, 40);
    const auto hash = outline_hash(run.states.front().outline());
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& rec = run.records[i];
      const auto& before = run.states[i].document();
      const auto& after = run.states[i + 1].document();
      const std::string where = "seed " + std::to_string(seed) + " step " + rec.paper_id;
      if (rec.decision != UpdateDecision::kUpdated) {
        abstains += rec.decision == UpdateDecision::kAbstained;
        o.expect(serialize_document(before) == serialize_document(after),
                 where + ": non-update changed the document");
      } else {
        ++texts;
        std::size_t grown = 0;
        std::string grown_id;
        for (const auto& s : after.sections) {
          if (s.sentences.size() != before.find_section(s.id)->sentences.size()) {
            ++grown;
            grown_id = s.id;
          }
        }
        o.expect(grown == 1 && rec.routed_section == grown_id,
                 where + ": " + std::to_string(grown) + " sections gained sentences");
        std::size_t added_rows = 0;
        for (const auto& t : after.tables) added_rows += t.rows.size() - before.find_table(t.id)->rows.size();
        const bool failed_row = rec.has_flag(flags::kTableFailed);
        table_failures += failed_row;
        rows += added_rows;
        o.expect((added_rows == 1) == (rec.routed_table.has_value() && !failed_row),
                 where + ": row insertion disagrees with table routing");
        o.expect(added_rows <= 1, where + ": more than one row inserted");
      }
      o.expect(outline_hash(run.states[i + 1].outline()) == hash, where + ": outline hash changed");
    }
  }
  o.detail << "abstain=" << abstains << " updates=" << texts
           << " rows=" << rows << " schema-rejected rows=" << table_failures;
}

void criterion_citations(Outcome& o) {
  static const std::regex marker(R"(\[(\d+(?:\s*,\s*\d+)*)\])");
  std::size_t documents = 0;
  for (std::uint32_t seed : {4u, 5u, 6u}) {
    const auto run = run_stream(seed, 50);
    for (const auto& state : run.states) {
      ++documents;
      const auto& doc = state.document();
      try {
        validate_document(doc);
      } catch (const Error& e) {
        o.expect(false, std::string("invalid document: ") + e.what());
      }
      std::set<std::string> keys;
      for (std::size_t i = 0; i < doc.references.size(); ++i) {
        o.expect(doc.references[i].number == i + 1, "reference numbering is not dense");
        o.expect(keys.insert(doc.references[i].key).second, "duplicate key " + doc.references[i].key);
      }
      for (const auto& s : doc.sections) {
        for (const auto& sent : s.sentences) {
          o.expect(count_placeholders(sent.text) == 0, "unresolved [cite] in " + sent.id);
          for (std::sregex_iterator it(sent.text.begin(), sent.text.end(), marker), end; it != end; ++it) {
            std::stringstream nums((*it)[1].str());
            std::string n;
            while (std::getline(nums, n, ',')) {
              const auto v = std::stoull(n);
              o.expect(v >= 1 && v <= doc.references.size(), "dangling marker in " + sent.id);
            }
          }
        }
      }
    }
  }
  o.detail << documents << " published documents checked";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "locality: dOut = 0 on every framework step", 10, criterion_locality},
      {2, "abstention precision from confusion matrices", 1, criterion_abstention},
      {3, "routing macro averages", 1, criterion_routing},
      {4, "table fidelity sample-weighted averages", 1, criterion_table_fidelity},
      {5, "similarity table macro row", 1, criterion_table1_macro},
      {6, "ROUGE-L and BLEU-4 against oracles", 5, criterion_metric_oracles},
      {7, "diff round trip and baseline disruption ordering", 10, criterion_diff_and_baselines},
      {8, "update loop semantics", 5, criterion_algorithm},
      {9, "citation construction", 5, criterion_citations},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.expect(secs < c.budget_seconds, "runtime " + fmt(secs, 2) + "s over budget");
    failed += !o.pass;
    std::printf("criterion %d: %s | %s | %.3fs | %s\n", c.number, o.pass ? "PASS" : "FAIL",
                c.title.c_str(), secs, o.report().c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
