#include "livesurvey/prompts.hpp"

namespace livesurvey::prompts {

const std::string_view kOutline =
    R"(You are assisting in updating and maintaining a technical survey
on {survey_topic}.

I want the survey outline to include ONLY the following sections
and tables:
Sections: {section_list}
Tables: {table_list}

Your task is to extract a structured outline from the existing
survey text while preserving the original section titles and
content scope.

Constraints:
Do not introduce new sections or tables.
Do not rename or merge sections.
Do not add content that is not explicitly present in the survey.

Return the output strictly in valid JSON format.

OUTPUT SCHEMA:
{"sections": [{"id": "<section id>", "section_title": "<original title>", "page_numbers": "<range>", "table_relevant": [<0 or 1 per listed table>], "summary": "<1-2 sentences>"}], "tables": [{"id": "<table id>", "title": "<original title>", "page_numbers": "<range>", "summary": "<concise summary>"}]}

SURVEY TEXT:
{survey_text}
)";

const std::string_view kAnalysis =
    R"(Analyze the following research paper text.
Extract and summarize the following aspects:

- Methods
- Novelty
- Results

PAPER TEXT:
{paper_text}

Use the headings "### Methods", "### Novelty" and "### Results".

OUTPUT:
)";

const std::string_view kAbstention =
    R"(You are a Research Editor deciding if a paper belongs in
a specific survey.

TARGET SURVEY SCOPE:
Title: {Title}
Keywords: {Keywords}
Abstract: {Abstract}
Core Criteria: {Author defined criterion}

CANDIDATE PAPER SUMMARY:
{paper_summary}

DECISION RULES:
Answer TRUE if the paper is related to the survey core topic.
Answer TRUE if it addresses methods techniques or applications
covered by the survey.
Answer FALSE only if the paper is clearly about a different
domain with no connection.

Does this paper belong in the survey
Answer TRUE or FALSE
)";

const std::string_view kSectionRouting =
    R"(You are an expert at categorizing {survey_topic}
research papers for a survey.

AVAILABLE SURVEY SECTIONS:
{section_list}

PAPER SUMMARY:
{paper_summary}

TASK:
Determine which 3 survey sections this paper belongs to (ranked by relevance). 

INSTRUCTIONS:
Identify the paper’s primary contribution.
Determine whether it proposes a framework, backbone,
auxiliary technique, dataset, or evaluation method.
Return exactly 3 section IDs as a JSON array.

OUTPUT:
[section_id_1, section_id_2, section_id_3]
)";

const std::string_view kInsertionPoint =
    R"(You are an expert at categorizing {survey_topic}
research papers for a survey.

Survey Section:
{survey_text}

PAPER SUMMARY:
{paper_summary}

Given the survey section text, select the most appropriate existing sentence as the
insertion point for this paper. The choice should be based on alignment between the
paper’s primary contribution and the thematic focus of the section.

Each sentence above is prefixed by its ID in square brackets. Answer with the ID
of the chosen sentence only, or "append" to place the paper after the last sentence.
)";

const std::string_view kTableRouting =
    R"(You are evaluating whether a research paper should be
included in the {table_title} table of a {survey_topic} survey.

TABLE DESCRIPTION:
{table_description}

PAPER SUMMARY:
{paper_summary}

QUESTION:
Does this paper contribute a NEW entry that should be listed
in the {table_title} table?

OUTPUT:
Answer only "yes" or "no".
)";

const std::string_view kTextSynthesis =
    R"(You are extending a survey paper. Your task is to write a
single paragraph about a new paper that seamlessly
continues the existing survey section.

EXISTING SURVEY SECTION:
{survey_text}

NEW PAPER INFORMATION:
{new_paper_summary}

INSTRUCTIONS:
Write exactly ONE paragraph that continues naturally from
the survey section above.
Match the EXACT writing style tone and technical depth of
the existing survey.
Start with the method or paper name followed by a colon.
Use the same citation placeholder format [cite].
Do NOT include headers labels or meta-text.
Do NOT write multiple paragraphs.

CONTINUATION PARAGRAPH:
)";

const std::string_view kTableSynthesis =
    R"(Extract {table_subject} attributes as JSON with these fields:
{field_list}

CRITICAL: Output ONLY the JSON object. Do NOT include
reasoning, explanations, or <think> tags.
Your response must start with { and end with }.

PAPER SUMMARY:
{paper_summary}
)";

const std::string_view kOneStepUpdate =
    R"(You are maintaining a survey paper. Update the survey below so that it
incorporates the new paper.

SURVEY (JSON):
{survey_json}

NEW PAPER:
Title: {paper_title}
Abstract: {paper_abstract}

{paper_text}

Return the complete updated survey as a single JSON object with exactly the
same format as the input survey. Cite the new paper with [cite].
)";

const std::string_view kOracleUpdate =
    R"(You are maintaining a survey paper. Update the survey below so that it
incorporates the new paper.

SURVEY (JSON):
{survey_json}

NEW PAPER:
Title: {paper_title}
Abstract: {paper_abstract}

{paper_text}

TARGET SECTION:
The new paper belongs in section {target_section_id} ({target_section_title}).

Return the complete updated survey as a single JSON object with exactly the
same format as the input survey. Cite the new paper with [cite].
)";

std::string render(std::string_view tmpl,
                   const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find_first_of("{}\n", i + 1);
      if (close != std::string_view::npos && tmpl[close] == '}') {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string retry_hint(int attempt, std::string_view reason) {
  return "\n[RETRY attempt=" + std::to_string(attempt) +
         "] The previous output was rejected: " + std::string(reason) +
         "\nFollow the required output format exactly.\n";
}

}  // namespace livesurvey::prompts
