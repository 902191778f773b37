#include "livesurvey/lenient_json.hpp"

#include "livesurvey/error.hpp"

namespace livesurvey {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Index one past the bracket matching text[open], or npos when unbalanced.
std::size_t match_bracket(std::string_view text, std::size_t open) {
  const char opener = text[open];
  const char closer = opener == '{' ? '}' : ']';
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == opener) {
      ++depth;
    } else if (c == closer) {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string strip_reasoning(std::string_view text) {
  std::string out(text);
  for (;;) {
    auto open = out.find("<think>");
    if (open == std::string::npos) break;
    auto close = out.find("</think>", open);
    if (close == std::string::npos) {
      out.erase(open);
      break;
    }
    out.erase(open, close + 8 - open);
  }
  return out;
}

std::string remove_trailing_commas(std::string_view json) {
  std::string out;
  out.reserve(json.size());
  bool in_string = false;
  for (std::size_t i = 0; i < json.size(); ++i) {
    char c = json[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < json.size()) {
        out.push_back(json[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == ',') {
      std::size_t j = i + 1;
      while (j < json.size() && is_ws(json[j])) ++j;
      if (j < json.size() && (json[j] == '}' || json[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

nlohmann::json parse_lenient_json(std::string_view text, JsonShape shape) {
  const std::string cleaned = strip_reasoning(text);
  const char opener = shape == JsonShape::kObject ? '{' : '[';
  const char* what = shape == JsonShape::kObject ? "object" : "array";
  std::string_view view(cleaned);
  // Fenced blocks and surrounding prose both reduce to "first balanced
  // payload of the requested shape".
  std::size_t start = view.find(opener);
  while (start != std::string_view::npos) {
    std::size_t end = match_bracket(view, start);
    if (end == std::string_view::npos) break;
    std::string candidate =
        remove_trailing_commas(view.substr(start, end - start));
    auto parsed = nlohmann::json::parse(candidate, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    start = view.find(opener, end);
  }
  throw Error(ErrorKind::kParse,
              std::string("output does not contain a parseable JSON ") + what);
}

}  // namespace livesurvey
