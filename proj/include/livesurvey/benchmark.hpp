#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "livesurvey/corpus.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/endpoint.hpp"
#include "livesurvey/metrics.hpp"
#include "livesurvey/outline.hpp"
#include "livesurvey/update.hpp"

namespace livesurvey {

/// Where a late paper's text sits in the full survey.
struct SpanAnnotation {
  std::string paper_id;
  std::string section_id;  // may be empty: then searched in every section
  std::string text;
  std::optional<std::string> table_id;
  std::optional<nlohmann::json> row;
};

std::vector<SpanAnnotation> spans_from_json(const nlohmann::json& j);

struct GroundTruthSpan {
  std::string paper_id;
  std::string section_id;  // S*
  std::string text;        // G_text
  std::vector<std::string> sentence_ids;  // ids in the full survey
  std::optional<std::string> table_id;
  std::optional<TableRow> gold_row;
};

struct LatePaper {
  PaperRecord paper;
  GroundTruthSpan span;
};

struct BenchmarkInstance {
  std::string name;
  SurveyDocument early_document;
  StructuredOutline outline;
  std::vector<LatePaper> late_papers;
  std::vector<PaperRecord> out_of_scope;

  SurveyState early_state() const;
  const SurveyScope& scope() const { return outline.scope; }
};

/// Removes each annotated span, its table row and its reference entry from
/// the full survey, renumbers the remaining references densely and rewrites
/// the in-text [n] markers. Throws Error(kIntegrity) naming the offending
/// paper when a span is missing or ambiguous, a reference is absent, or a
/// removed reference is still cited elsewhere.
BenchmarkInstance build_instance(std::string name, const SurveyState& full,
                                 const std::vector<SpanAnnotation>& spans,
                                 const std::vector<PaperRecord>& late_papers,
                                 std::vector<PaperRecord> out_of_scope);

/// Loads an instance file: {"name", "survey", "outline", "spans",
/// "late_feed", "out_of_scope_feed"}; paths resolve against the file.
BenchmarkInstance load_instance(const std::filesystem::path& instance_file);

/// Rewrites every numeric citation marker ("[3]", "[3, 7]") through `map`.
/// Numbers missing from the map throw Error(kIntegrity).
std::string renumber_citations(std::string_view text,
                               const std::map<std::uint64_t, std::uint64_t>& map);

enum class Method { kFramework, kOneStep, kOracle };
const char* to_string(Method method);
Method method_from_string(std::string_view name);

struct StepResult {
  Method method = Method::kFramework;
  std::string paper_id;
  bool out_of_scope = false;  // y
  bool abstained = false;     // a-hat
  bool failed = false;
  std::string error;
  std::optional<GroundTruthSpan> gold;
  std::string paper_repr;  // P: title and abstract
  std::optional<UpdateRecord> record;  // framework only
  SurveyDocument before;
  SurveyDocument after;
};

/// Late papers, then out-of-scope papers, each through apply_update.
std::vector<StepResult> run_framework_stream(const BenchmarkInstance& instance,
                                             TextGenerator& generator,
                                             const Clock& clock = utc_now);

/// Single-call baselines over the late papers. The response must carry the
/// whole survey document; anything else fails the step and the previous
/// document is carried forward.
std::vector<StepResult> run_one_step_baseline(const BenchmarkInstance& instance,
                                              TextGenerator& generator);
std::vector<StepResult> run_oracle_baseline(const BenchmarkInstance& instance,
                                            TextGenerator& generator);

/// Survey JSON handed to the baselines: sections as {id, title, text}.
std::string compact_document_json(const SurveyDocument& doc);

struct StepEvaluation {
  std::string survey;
  Method method = Method::kFramework;
  std::string paper_id;
  bool late = false;
  bool failed = false;
  bool out_of_scope = false;  // y
  bool abstained = false;     // a-hat
  std::size_t u_size = 0;
  std::optional<double> bleu4;
  std::optional<double> rouge_l_f;
  std::optional<double> bert_sim;
  std::optional<double> semantic_align;
  std::optional<double> local_coherence;
  std::size_t delta_tokens = 0;
  std::size_t delta_out = 0;
  std::optional<bool> routing_hit1;
  std::optional<bool> routing_hit3;
  std::optional<bool> table_hit1;
  std::optional<bool> table_hit3;
  std::optional<double> table_fidelity;
  std::optional<double> table_exact;
  std::string embedding_error;
};

/// Scores one step. Without an embedder (or when it fails) the embedding
/// metrics stay absent.
StepEvaluation evaluate_step(const std::string& survey, const StepResult& step,
                             const MetricSettings& settings, Embedder* embedder);

}  // namespace livesurvey
