#include "livesurvey/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "livesurvey/error.hpp"
#include "livesurvey/text.hpp"

namespace livesurvey {
namespace {

std::size_t lcs_tokens(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  std::map<std::string, int> ids;
  auto intern = [&](const std::vector<std::string>& v) {
    std::vector<int> out;
    out.reserve(v.size());
    for (const auto& t : v) out.push_back(ids.emplace(t, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto ia = intern(a);
  const auto ib = intern(b);
  return lcs_length(ia, ib);
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

}  // namespace

void MetricSettings::validate() const {
  if (!(rouge_beta > 0)) throw Error(ErrorKind::kConfig, "ROUGE-L beta must be positive");
  if (bleu_smoothing != kBleuSmoothingAddOne) {
    throw Error(ErrorKind::kConfig, "unsupported BLEU smoothing '" + bleu_smoothing +
                                        "' (only 'add-one' is implemented)");
  }
  if (coherence_k == 0) throw Error(ErrorKind::kConfig, "coherence window k must be positive");
  if (fidelity_tau < -1 || fidelity_tau > 1) {
    throw Error(ErrorKind::kConfig, "fidelity threshold tau must lie in [-1, 1]");
  }
}

double rouge_l(std::string_view candidate, std::string_view reference, double beta) {
  const auto u = tokenize(candidate);
  const auto g = tokenize(reference);
  if (u.empty() || g.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_tokens(u, g));
  if (lcs == 0) return 0.0;
  const double r = lcs / static_cast<double>(g.size());
  const double p = lcs / static_cast<double>(u.size());
  const double b2 = beta * beta;
  return (1 + b2) * r * p / (r + b2 * p);
}

double bleu_4(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  if (c.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngrams(c, n);
    const auto ref = ngrams(r, n);
    std::size_t total = 0, matched = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    const double p = matched > 0
                         ? static_cast<double>(matched) / static_cast<double>(total)
                         : 1.0 / static_cast<double>(total + 1);
    log_sum += std::log(p);
  }
  const double cl = static_cast<double>(c.size());
  const double rl = static_cast<double>(r.size());
  const double bp = cl > rl ? 1.0 : std::exp(1.0 - rl / cl);
  return bp * std::exp(log_sum / 4.0);
}

double cosine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::kEvaluation, "cosine of vectors with different dimensions");
  }
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0 || ny == 0) {
    throw Error(ErrorKind::kEvaluation, "cosine similarity is undefined for a zero vector");
  }
  return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

std::vector<std::vector<double>> embed(Embedder& embedder,
                                       const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  std::vector<std::vector<double>> vectors;
  try {
    vectors = embedder.embed(texts);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kEvaluation) throw;
    throw Error(ErrorKind::kEvaluation, std::string("embedding unavailable: ") + e.what());
  }
  if (vectors.size() != texts.size()) {
    throw Error(ErrorKind::kEvaluation, "embedding endpoint returned " +
                                            std::to_string(vectors.size()) +
                                            " vectors for " +
                                            std::to_string(texts.size()) + " inputs");
  }
  for (const auto& v : vectors) {
    if (v.size() != embedder.dimension()) {
      throw Error(ErrorKind::kEvaluation, "embedding has dimension " +
                                              std::to_string(v.size()) + ", expected " +
                                              std::to_string(embedder.dimension()));
    }
  }
  return vectors;
}

double bert_similarity(const std::string& u_text, const std::string& g_text,
                       Embedder& embedder) {
  const auto v = embed(embedder, {u_text, g_text});
  return cosine(v[0], v[1]);
}

std::optional<double> semantic_alignment(const std::vector<std::string>& u,
                                         const std::string& paper_repr,
                                         Embedder& embedder) {
  if (u.empty()) return std::nullopt;
  std::vector<std::string> texts = u;
  texts.push_back(paper_repr);
  const auto v = embed(embedder, texts);
  double sum = 0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += cosine(v[i], v.back());
  return sum / static_cast<double>(u.size());
}

std::optional<double> local_coherence(const std::vector<AlignedSentence>& u,
                                      const SurveyDocument& post, std::size_t k,
                                      Embedder& embedder) {
  // Collect every text once, then embed in one batch.
  std::vector<std::string> texts;
  std::map<std::string, std::size_t> index;
  auto slot = [&](const std::string& text) {
    auto [it, fresh] = index.emplace(text, texts.size());
    if (fresh) texts.push_back(text);
    return it->second;
  };
  struct Window {
    std::size_t self;
    std::vector<std::size_t> neighbours;
  };
  std::vector<Window> windows;
  for (const auto& item : u) {
    const Section* section = post.find_section(item.section_id);
    if (!section) {
      throw Error(ErrorKind::kEvaluation, "section '" + item.section_id +
                                              "' of an inserted sentence is missing");
    }
    const auto& ss = section->sentences;
    auto pos = std::find_if(ss.begin(), ss.end(), [&](const Sentence& s) {
      return s.id == item.sentence.id;
    });
    if (pos == ss.end()) {
      throw Error(ErrorKind::kEvaluation, "inserted sentence '" + item.sentence.id +
                                              "' not found in the updated document");
    }
    const std::size_t i = static_cast<std::size_t>(pos - ss.begin());
    Window w{slot(pos->text), {}};
    for (std::size_t j = i >= k ? i - k : 0; j < std::min(ss.size(), i + k + 1); ++j) {
      if (j != i) w.neighbours.push_back(slot(ss[j].text));
    }
    if (!w.neighbours.empty()) windows.push_back(std::move(w));
  }
  if (windows.empty()) return std::nullopt;
  const auto v = embed(embedder, texts);
  double total = 0;
  for (const auto& w : windows) {
    double sum = 0;
    for (auto n : w.neighbours) sum += cosine(v[w.self], v[n]);
    total += sum / static_cast<double>(w.neighbours.size());
  }
  return total / static_cast<double>(windows.size());
}

bool routing_hit(const RoutingOutcome& outcome, std::size_t top) {
  const std::size_t n = std::min(top, outcome.ranked.size());
  return std::find(outcome.ranked.begin(), outcome.ranked.begin() + n, outcome.gold) !=
         outcome.ranked.begin() + n;
}

RoutingAccuracy routing_accuracy(const std::vector<RoutingOutcome>& outcomes) {
  RoutingAccuracy acc;
  acc.n = outcomes.size();
  if (outcomes.empty()) return acc;
  for (const auto& o : outcomes) {
    acc.acc1 += routing_hit(o, 1) ? 1 : 0;
    acc.acc3 += routing_hit(o, 3) ? 1 : 0;
  }
  acc.acc1 /= static_cast<double>(acc.n);
  acc.acc3 /= static_cast<double>(acc.n);
  return acc;
}

void AbstentionCounts::add(bool y, bool a) {
  if (y && a) ++tp;
  else if (!y && a) ++fp;
  else if (!y && !a) ++tn;
  else ++fn;
}

AbstentionScores abstention_pr(const AbstentionCounts& c) {
  AbstentionScores s;
  if (c.tp + c.fp > 0) s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return s;
}

std::string normalize_field(std::string_view value) {
  std::string out = normalize_whitespace(value);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

FidelityScore table_fidelity(const TableRow& predicted, const TableRow& gold,
                             Embedder* embedder, double tau) {
  FidelityScore score;
  score.fields = gold.size();
  if (gold.empty()) return score;
  std::size_t correct = 0, exact = 0;
  std::vector<std::pair<std::string, std::string>> pending;
  for (const auto& [name, gold_value] : gold) {
    auto it = predicted.find(name);
    if (it == predicted.end()) continue;
    const std::string p = cell_to_string(it->second);
    const std::string g = cell_to_string(gold_value);
    if (normalize_field(p) == normalize_field(g)) {
      ++exact;
      ++correct;
    } else if (embedder) {
      pending.emplace_back(p, g);
    }
  }
  if (!pending.empty()) {
    std::vector<std::string> texts;
    for (const auto& [p, g] : pending) {
      texts.push_back(p);
      texts.push_back(g);
    }
    const auto v = embed(*embedder, texts);
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (cosine(v[2 * i], v[2 * i + 1]) > tau) ++correct;
    }
  }
  score.fidelity = static_cast<double>(correct) / static_cast<double>(gold.size());
  score.exact_match = static_cast<double>(exact) / static_cast<double>(gold.size());
  return score;
}

GroupStats describe(std::span<const double> values) {
  GroupStats s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

Aggregate aggregate(const std::vector<GroupedValue>& samples) {
  std::map<std::string, std::vector<double>> groups;
  std::vector<double> pooled;
  for (const auto& s : samples) {
    if (!s.value) continue;
    groups[s.group].push_back(*s.value);
    pooled.push_back(*s.value);
  }
  Aggregate agg;
  std::vector<double> means;
  for (const auto& [group, values] : groups) {
    agg.per_group[group] = describe(values);
    means.push_back(agg.per_group[group].mean);
  }
  if (!means.empty()) {
    const auto m = describe(means);
    agg.macro = m.mean;
    agg.macro_stddev = m.stddev;
    agg.micro = describe(pooled).mean;
  }
  return agg;
}

}  // namespace livesurvey
