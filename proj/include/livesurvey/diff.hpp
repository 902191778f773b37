#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livesurvey/document.hpp"

namespace livesurvey {

/// Region labels attach every document token to the section or table it
/// belongs to. References and metadata carry no region and are not part of
/// the disruption stream.
std::string section_region(std::string_view section_id);
std::string table_region(std::string_view table_id);

struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<std::string> regions;  // parallel to tokens

  std::size_t size() const { return tokens.size(); }
};

/// Tokens of every section (title then sentences) and every table (title
/// then cells row by row, in schema order), in document order.
TokenStream document_tokens(const SurveyDocument& doc);

enum class EditKind { kInsert, kDelete };

/// A single token edit. Deletions are positioned in the before stream,
/// insertions in the after stream.
struct EditOp {
  EditKind kind = EditKind::kInsert;
  std::size_t position = 0;
  std::string token;
  std::string region;

  bool operator==(const EditOp&) const = default;
};

struct EditScript {
  std::vector<EditOp> ops;  // in stream order
};

/// Minimal edit script between two token streams. Tokens only match when
/// they also belong to the same region.
EditScript diff_streams(const TokenStream& before, const TokenStream& after);

EditScript token_diff(const SurveyDocument& before, const SurveyDocument& after);

/// Replays a script on the before tokens. Throws Error(kEvaluation) if the
/// script does not fit the stream.
std::vector<std::string> apply_edit_script(std::span<const std::string> before,
                                           const EditScript& script);

std::size_t delta_tokens(const EditScript& script);

/// Number of edits whose region is not in `scope`.
std::size_t delta_out(const EditScript& script,
                      const std::set<std::string>& scope);

/// Length of the longest common subsequence of two integer sequences,
/// computed with the same diff engine.
std::size_t lcs_length(std::span<const int> a, std::span<const int> b);

/// Edit distance (insertions plus deletions) between two integer sequences.
std::size_t edit_distance(std::span<const int> a, std::span<const int> b);

struct AlignedSentence {
  std::string section_id;
  Sentence sentence;
};

/// Sentences of `after` that are new or modified relative to `before`,
/// found by aligning sentence texts section by section. Document order.
std::vector<AlignedSentence> new_sentences(const SurveyDocument& before,
                                           const SurveyDocument& after);

}  // namespace livesurvey
