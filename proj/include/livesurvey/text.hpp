#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace livesurvey {

/// Identifier written into report headers so results can be tied to the
/// exact tokenization rule that produced them.
inline constexpr std::string_view kTokenizerId = "ws-punct-v1";

/// Collapses every whitespace run to a single space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Splits text into sentences. A boundary is a `.`, `?` or `!` followed by
/// whitespace and then an uppercase ASCII letter or a digit, unless the word
/// ending at the terminator is a known abbreviation ("Fig.", "e.g.", ...).
/// Whitespace-only input yields an empty list.
std::vector<std::string> segment_sentences(std::string_view text);

/// Whitespace-plus-punctuation tokenizer. Runs of letters, digits and
/// non-ASCII bytes form word tokens; every ASCII punctuation character is a
/// token of its own.
std::vector<std::string> tokenize(std::string_view text);

/// Number of literal "[cite]" placeholders in text.
std::size_t count_placeholders(std::string_view text);

inline constexpr std::string_view kCitePlaceholder = "[cite]";

}  // namespace livesurvey
