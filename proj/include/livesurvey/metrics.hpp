#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livesurvey/diff.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/endpoint.hpp"

namespace livesurvey {

/// Fixed metric settings; every report header records them.
struct MetricSettings {
  double rouge_beta = 1.0;
  std::string bleu_smoothing = "add-one";
  std::size_t coherence_k = 2;
  double fidelity_tau = 0.6;

  void validate() const;
};

inline constexpr std::string_view kBleuSmoothingAddOne = "add-one";

/// ROUGE-L F-measure over tokenize() tokens. Empty inputs score 0.
double rouge_l(std::string_view candidate, std::string_view reference,
               double beta = 1.0);

/// Sentence BLEU-4 with uniform weights and a brevity penalty. Orders with
/// zero clipped matches use add-one smoothing: (0 + 1) / (count + 1).
/// An empty candidate scores 0.
double bleu_4(std::string_view candidate, std::string_view reference);

/// Throws Error(kEvaluation) on a dimension mismatch or a zero vector.
double cosine(std::span<const double> x, std::span<const double> y);

/// Embeds texts through the endpoint, enforcing one vector of the declared
/// dimension per input. Endpoint failures surface as Error(kEvaluation) so
/// callers can mark embedding metrics absent.
std::vector<std::vector<double>> embed(Embedder& embedder,
                                       const std::vector<std::string>& texts);

double bert_similarity(const std::string& u_text, const std::string& g_text,
                       Embedder& embedder);

/// Mean cosine between each inserted sentence and the paper representation.
/// Absent when no sentence was inserted.
std::optional<double> semantic_alignment(const std::vector<std::string>& u,
                                         const std::string& paper_repr,
                                         Embedder& embedder);

/// Mean over inserted sentences of the mean cosine to the up-to-k sentences
/// before and after it in the same section of `post`. A sentence whose
/// window is empty (it is alone in its section) contributes nothing; if no
/// sentence has a window the result is absent.
std::optional<double> local_coherence(const std::vector<AlignedSentence>& u,
                                      const SurveyDocument& post, std::size_t k,
                                      Embedder& embedder);

struct RoutingAccuracy {
  double acc1 = 0.0;
  double acc3 = 0.0;
  std::size_t n = 0;
};

struct RoutingOutcome {
  std::vector<std::string> ranked;  // empty when the paper was not routed
  std::string gold;
};

bool routing_hit(const RoutingOutcome& outcome, std::size_t top);
RoutingAccuracy routing_accuracy(const std::vector<RoutingOutcome>& outcomes);

/// y = 1 marks an out-of-scope paper, a = 1 an abstention.
struct AbstentionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(bool y, bool a);
};

struct AbstentionScores {
  std::optional<double> precision;  // absent with zero abstentions
  std::optional<double> recall;     // absent with zero out-of-scope papers
};

AbstentionScores abstention_pr(const AbstentionCounts& counts);

struct FidelityScore {
  double fidelity = 0.0;
  double exact_match = 0.0;
  std::size_t fields = 0;
};

std::string normalize_field(std::string_view value);

/// Fields come from the gold row. A field counts as correct on a normalized
/// exact match, or when the cosine of its embeddings exceeds tau. Without an
/// embedder only exact matches count.
FidelityScore table_fidelity(const TableRow& predicted, const TableRow& gold,
                             Embedder* embedder, double tau);

struct GroupStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
  std::size_t n = 0;
};

struct Aggregate {
  std::map<std::string, GroupStats> per_group;
  std::optional<double> macro;  // unweighted mean of group means
  std::optional<double> micro;  // pooled mean over all samples
  std::optional<double> macro_stddev;
};

GroupStats describe(std::span<const double> values);

struct GroupedValue {
  std::string group;
  std::optional<double> value;  // absent values are skipped
};

Aggregate aggregate(const std::vector<GroupedValue>& samples);

}  // namespace livesurvey
