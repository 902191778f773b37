#include "livesurvey/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace livesurvey {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_ascii_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

// Compared against the whitespace-delimited word that ends at a '.'.
constexpr std::array<std::string_view, 24> kAbbreviations = {
    "Fig.",  "Figs.", "fig.",  "Eq.",  "Eqs.", "eq.",    "al.",     "e.g.",
    "i.e.",  "cf.",   "vs.",   "Sec.", "Secs.", "Tab.",  "No.",     "Nos.",
    "Dr.",   "Mr.",   "Ms.",   "Mrs.", "Prof.", "approx.", "resp.", "Ref."};

bool is_abbreviation(std::string_view word) {
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) !=
         kAbbreviations.end();
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  const std::string norm = normalize_whitespace(text);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  for (std::size_t i = 0; i < norm.size(); ++i) {
    if (!is_terminator(norm[i])) continue;
    // Normalized text has single spaces, so a boundary looks like "x. Y".
    if (i + 2 >= norm.size() || norm[i + 1] != ' ') continue;
    auto next = static_cast<unsigned char>(norm[i + 2]);
    if (!(std::isupper(next) || std::isdigit(next))) continue;
    if (norm[i] == '.') {
      std::size_t word_start = norm.rfind(' ', i);
      word_start = word_start == std::string::npos ? 0 : word_start + 1;
      if (word_start < start) word_start = start;
      if (is_abbreviation(std::string_view(norm).substr(
              word_start, i + 1 - word_start))) {
        continue;
      }
    }
    sentences.push_back(norm.substr(start, i + 1 - start));
    start = i + 2;
  }
  if (start < norm.size()) sentences.push_back(norm.substr(start));
  return sentences;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (char c : text) {
    if (is_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      tokens.emplace_back(1, c);
    } else {
      word.push_back(c);
    }
  }
  flush();
  return tokens;
}

std::size_t count_placeholders(std::string_view text) {
  std::size_t count = 0;
  for (auto pos = text.find(kCitePlaceholder); pos != std::string_view::npos;
       pos = text.find(kCitePlaceholder, pos + kCitePlaceholder.size())) {
    ++count;
  }
  return count;
}

}  // namespace livesurvey
