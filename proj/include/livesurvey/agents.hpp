#pragma once

#include <optional>
#include <string>
#include <vector>

#include "livesurvey/corpus.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/endpoint.hpp"
#include "livesurvey/outline.hpp"

namespace livesurvey {

/// Role keys used on every generation request. Table routing appends
/// "/<table id>" because it asks one question per table.
namespace roles {
inline constexpr std::string_view kOutline = "outline";
inline constexpr std::string_view kAnalysis = "analysis";
inline constexpr std::string_view kAbstention = "abstention";
inline constexpr std::string_view kSectionRouting = "section_routing";
inline constexpr std::string_view kInsertionPoint = "insertion_point";
inline constexpr std::string_view kTableRouting = "table_routing";
inline constexpr std::string_view kTextSynthesis = "text_synthesis";
inline constexpr std::string_view kTableSynthesis = "table_synthesis";
inline constexpr std::string_view kOneStep = "one_step";
inline constexpr std::string_view kOracle = "oracle";
}  // namespace roles

std::string table_routing_role(std::string_view table_id);

inline constexpr std::string_view kAppend = "append";

/// What every agent needs: the generation endpoint and the survey topic used
/// to phrase role prompts. Agents only return proposals; none of them can
/// touch survey state.
struct AgentContext {
  TextGenerator& generator;
  std::string survey_topic;
};

struct AbstentionDecision {
  bool include = false;
  bool parse_abstain = false;  // unparseable output treated as abstain
  int attempts = 0;
};

struct RoutingDecision {
  std::vector<std::string> ranked_sections;  // top-1 first
  std::string insertion_sentence_id;         // sentence id or "append"
  bool insertion_fallback = false;           // unknown id replaced by append
};

enum class YesNo { kYes, kNo, kUnparsed };
const char* to_string(YesNo answer);

struct TableRoutingDecision {
  std::optional<std::string> table_id;  // first "yes" in outline order
  std::vector<std::pair<std::string, YesNo>> answers;
};

struct TextDraft {
  std::string text;
  std::size_t placeholder_count = 0;
};

/// Extracts a structured outline restricted to the allowed ids. The result
/// is unapproved. Throws Error(kSchema) when the output invents, drops or
/// renames entries after retries are spent.
StructuredOutline run_outline_agent(const AgentContext& ctx,
                                    const SurveyDocument& doc,
                                    const std::vector<std::string>& allowed_sections,
                                    const std::vector<std::string>& allowed_tables,
                                    const SurveyScope& scope);

PaperSummary run_analysis_agent(const AgentContext& ctx,
                                const PaperRecord& paper);

AbstentionDecision run_abstention_agent(const AgentContext& ctx,
                                        const PaperSummary& summary,
                                        const SurveyScope& scope);

/// Two calls: a top-3 ranking against outline summaries, then an insertion
/// sentence inside the top-ranked section.
RoutingDecision run_section_routing(const AgentContext& ctx,
                                    const PaperSummary& summary,
                                    const StructuredOutline& outline,
                                    const SurveyDocument& doc);

TableRoutingDecision run_table_routing(const AgentContext& ctx,
                                       const PaperSummary& summary,
                                       const StructuredOutline& outline,
                                       const SurveyDocument& doc);

TextDraft run_text_synthesis(const AgentContext& ctx,
                             const std::string& section_text,
                             const PaperSummary& summary);

TableRow run_table_synthesis(const AgentContext& ctx, const SurveyTable& table,
                             const PaperSummary& summary);

// Output parsers, exposed for direct testing.
PaperSummary parse_analysis_output(std::string_view text);
std::optional<bool> parse_true_false(std::string_view text);
YesNo parse_yes_no(std::string_view text);
std::vector<std::string> parse_section_ranking(std::string_view text,
                                               const StructuredOutline& outline);
std::string parse_text_synthesis(std::string_view text);

/// Renders the field list of the table synthesis prompt from a schema.
std::string describe_schema_fields(const SurveyTable& table);

}  // namespace livesurvey
