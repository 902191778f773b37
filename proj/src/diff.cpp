#include "livesurvey/diff.hpp"

#include <algorithm>
#include <unordered_map>

#include "livesurvey/error.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

enum class Step : unsigned char { kEqual, kDelete, kInsert };

struct Snake {
  int x = 0, y = 0, u = 0, v = 0;
  int d = 0;
};

// Linear-space middle snake (Myers 1986, section 4b). `a` has length n,
// `b` length m; both non-empty.
Snake middle_snake(const int* a, int n, const int* b, int m,
                   std::vector<int>& vf, std::vector<int>& vb) {
  const int max = (n + m + 1) / 2;
  const int delta = n - m;
  const bool odd = (delta & 1) != 0;
  const int off = max + 1;
  std::fill(vf.begin(), vf.begin() + 2 * off + 1, 0);
  std::fill(vb.begin(), vb.begin() + 2 * off + 1, 0);
  for (int d = 0; d <= max; ++d) {
    for (int k = -d; k <= d; k += 2) {
      int x = (k == -d || (k != d && vf[off + k - 1] < vf[off + k + 1]))
                  ? vf[off + k + 1]
                  : vf[off + k - 1] + 1;
      int y = x - k;
      const int x0 = x, y0 = y;
      while (x < n && y < m && a[x] == b[y]) ++x, ++y;
      vf[off + k] = x;
      const int c = delta - k;
      if (odd && c >= -(d - 1) && c <= d - 1 && x + vb[off + c] >= n) {
        return {x0, y0, x, y, 2 * d - 1};
      }
    }
    for (int c = -d; c <= d; c += 2) {
      int x = (c == -d || (c != d && vb[off + c - 1] < vb[off + c + 1]))
                  ? vb[off + c + 1]
                  : vb[off + c - 1] + 1;
      int y = x - c;
      const int x0 = x, y0 = y;
      while (x < n && y < m && a[n - 1 - x] == b[m - 1 - y]) ++x, ++y;
      vb[off + c] = x;
      const int k = delta - c;
      if (!odd && k >= -d && k <= d && x + vf[off + k] >= n) {
        return {n - x, m - y, n - x0, m - y0, 2 * d};
      }
    }
  }
  throw Error(ErrorKind::kEvaluation, "diff failed to find a middle snake");
}

void diff_rec(const int* a, int n, const int* b, int m, std::vector<Step>& out,
              std::vector<int>& vf, std::vector<int>& vb) {
  int prefix = 0;
  while (prefix < n && prefix < m && a[prefix] == b[prefix]) ++prefix;
  out.insert(out.end(), prefix, Step::kEqual);
  a += prefix, b += prefix, n -= prefix, m -= prefix;
  int suffix = 0;
  while (suffix < n && suffix < m && a[n - 1 - suffix] == b[m - 1 - suffix]) {
    ++suffix;
  }
  n -= suffix, m -= suffix;
  if (n == 0 || m == 0) {
    out.insert(out.end(), n, Step::kDelete);
    out.insert(out.end(), m, Step::kInsert);
  } else {
    const Snake s = middle_snake(a, n, b, m, vf, vb);
    if (s.d <= 1) {
      // After trimming, a single edit separates the two sequences.
      out.insert(out.end(), n, Step::kDelete);
      out.insert(out.end(), m, Step::kInsert);
    } else {
      diff_rec(a, s.x, b, s.y, out, vf, vb);
      out.insert(out.end(), s.u - s.x, Step::kEqual);
      diff_rec(a + s.u, n - s.u, b + s.v, m - s.v, out, vf, vb);
    }
  }
  out.insert(out.end(), suffix, Step::kEqual);
}

std::vector<Step> diff_ints(std::span<const int> a, std::span<const int> b) {
  std::vector<Step> steps;
  steps.reserve(a.size() + b.size());
  const std::size_t cap = (a.size() + b.size() + 1) / 2 + 1;
  std::vector<int> vf(2 * cap + 3), vb(2 * cap + 3);
  diff_rec(a.data(), static_cast<int>(a.size()), b.data(),
           static_cast<int>(b.size()), steps, vf, vb);
  return steps;
}

void append_tokens(TokenStream& stream, std::string_view text,
                   const std::string& region) {
  for (auto& t : tokenize(text)) {
    stream.tokens.push_back(std::move(t));
    stream.regions.push_back(region);
  }
}

}  // namespace

std::string section_region(std::string_view section_id) {
  return "section:" + std::string(section_id);
}

std::string table_region(std::string_view table_id) {
  return "table:" + std::string(table_id);
}

TokenStream document_tokens(const SurveyDocument& doc) {
  TokenStream stream;
  for (const auto& section : doc.sections) {
    const std::string region = section_region(section.id);
    append_tokens(stream, section.title, region);
    for (const auto& s : section.sentences) append_tokens(stream, s.text, region);
  }
  for (const auto& table : doc.tables) {
    const std::string region = table_region(table.id);
    append_tokens(stream, table.title, region);
    for (const auto& row : table.rows) {
      for (const auto& col : table.schema) {
        auto it = row.find(col.name);
        if (it != row.end()) append_tokens(stream, cell_to_string(it->second), region);
      }
    }
  }
  return stream;
}

EditScript diff_streams(const TokenStream& before, const TokenStream& after) {
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const TokenStream& s) {
    std::vector<int> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::string key = s.regions[i];
      key.push_back('\x1f');
      key += s.tokens[i];
      out.push_back(ids.emplace(std::move(key), static_cast<int>(ids.size()))
                        .first->second);
    }
    return out;
  };
  const auto a = intern(before);
  const auto b = intern(after);
  EditScript script;
  std::size_t i = 0, j = 0;
  for (Step step : diff_ints(a, b)) {
    switch (step) {
      case Step::kEqual: ++i, ++j; break;
      case Step::kDelete:
        script.ops.push_back({EditKind::kDelete, i, before.tokens[i], before.regions[i]});
        ++i;
        break;
      case Step::kInsert:
        script.ops.push_back({EditKind::kInsert, j, after.tokens[j], after.regions[j]});
        ++j;
        break;
    }
  }
  return script;
}

EditScript token_diff(const SurveyDocument& before, const SurveyDocument& after) {
  return diff_streams(document_tokens(before), document_tokens(after));
}

std::vector<std::string> apply_edit_script(std::span<const std::string> before,
                                           const EditScript& script) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto copy_until = [&](std::size_t before_index) {
    if (before_index > before.size() || before_index < i) {
      throw Error(ErrorKind::kEvaluation, "edit script position out of order");
    }
    out.insert(out.end(), before.begin() + i, before.begin() + before_index);
    i = before_index;
  };
  for (const auto& op : script.ops) {
    if (op.kind == EditKind::kDelete) {
      copy_until(op.position);
      if (i >= before.size() || before[i] != op.token) {
        throw Error(ErrorKind::kEvaluation, "edit script deletes a token that is not there");
      }
      ++i;
    } else {
      if (op.position < out.size()) {
        throw Error(ErrorKind::kEvaluation, "edit script position out of order");
      }
      copy_until(i + (op.position - out.size()));
      out.push_back(op.token);
    }
  }
  copy_until(before.size());
  return out;
}

std::size_t delta_tokens(const EditScript& script) { return script.ops.size(); }

std::size_t delta_out(const EditScript& script,
                      const std::set<std::string>& scope) {
  return static_cast<std::size_t>(std::count_if(
      script.ops.begin(), script.ops.end(),
      [&](const EditOp& op) { return !scope.contains(op.region); }));
}

std::size_t lcs_length(std::span<const int> a, std::span<const int> b) {
  const auto steps = diff_ints(a, b);
  return static_cast<std::size_t>(std::count(steps.begin(), steps.end(), Step::kEqual));
}

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
  return a.size() + b.size() - 2 * lcs_length(a, b);
}

std::vector<AlignedSentence> new_sentences(const SurveyDocument& before,
                                           const SurveyDocument& after) {
  std::vector<AlignedSentence> result;
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const std::vector<Sentence>& sentences) {
    std::vector<int> out;
    for (const auto& s : sentences) {
      out.push_back(ids.emplace(s.text, static_cast<int>(ids.size())).first->second);
    }
    return out;
  };
  static const std::vector<Sentence> kNone;
  for (const auto& section : after.sections) {
    const Section* old = before.find_section(section.id);
    const auto a = intern(old ? old->sentences : kNone);
    const auto b = intern(section.sentences);
    std::size_t j = 0;
    for (Step step : diff_ints(a, b)) {
      if (step == Step::kDelete) continue;
      if (step == Step::kInsert) result.push_back({section.id, section.sentences[j]});
      ++j;
    }
  }
  return result;
}

}  // namespace livesurvey
