#include <cmath>
#include <random>

#include "doctest.h"
#include "livesurvey/error.hpp"
#include "livesurvey/metrics.hpp"
#include "livesurvey/mock.hpp"
#include "oracles.hpp"

using namespace livesurvey;
using doctest::Approx;

namespace {
std::string random_text(std::mt19937& rng, int max_words) {
  static const char* words[] = {"the", "cat", "sat", "on", "mat", "a", "dog", ",", "."};
  std::uniform_int_distribution<int> len(1, max_words), w(0, 8);
  std::string out;
  for (int i = len(rng); i > 0; --i) out += std::string(words[w(rng)]) + " ";
  return out;
}

// Embedder with fixed vectors for exact cosine checks.
class TableEmbedder final : public Embedder {
 public:
  std::map<std::string, std::vector<double>> table;
  std::vector<std::vector<double>> embed(std::span<const std::string> texts) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) out.push_back(table.at(t));
    return out;
  }
  std::size_t dimension() const override { return 2; }
  std::string model_id() const override { return "table"; }
};
}  // namespace

TEST_CASE("rouge-l known value") {
  CHECK(rouge_l("the cat sat", "the cat") == Approx(0.8));
  CHECK(rouge_l("", "the cat") == 0.0);
  CHECK(rouge_l("dog", "cat") == 0.0);
}

TEST_CASE("bleu-4 known value with add-one smoothing") {
  // p1=3/4, p2=2/3, p3=1/2, p4 smoothed to 1/2, no brevity penalty.
  const double expected = std::pow(0.75 * (2.0 / 3.0) * 0.5 * 0.5, 0.25);
  CHECK(bleu_4("a b c d", "a b c e") == Approx(expected).epsilon(1e-12));
  CHECK(expected == Approx(0.5946).epsilon(1e-4));
  CHECK(bleu_4("", "a") == 0.0);
}

TEST_CASE("text metrics agree with the oracles on random inputs") {
  std::mt19937 rng(2024);
  for (int i = 0; i < 400; ++i) {
    const auto c = random_text(rng, 25), r = random_text(rng, 25);
    CHECK(rouge_l(c, r) == Approx(oracle::rouge_l_f1(c, r)).epsilon(1e-12));
    CHECK(bleu_4(c, r) == Approx(oracle::bleu4_add_one(c, r)).epsilon(1e-12));
  }
}

TEST_CASE("cosine known values and failures") {
  const std::vector<double> x{1, 0}, y{1, 1}, z{0, 0};
  CHECK(cosine(x, y) == Approx(0.70710678).epsilon(1e-8));
  CHECK(cosine(x, y) == Approx(oracle::cosine(x, y)));
  CHECK_THROWS_AS(cosine(x, z), Error);
  CHECK_THROWS_AS(cosine(x, std::vector<double>{1, 0, 0}), Error);
}

TEST_CASE("semantic alignment averages sentence similarity to the paper") {
  TableEmbedder e;
  e.table = {{"s1", {1, 0}}, {"s2", {0, 1}}, {"P", {1, 1}}};
  const auto v = semantic_alignment({"s1", "s2"}, "P", e);
  REQUIRE(v.has_value());
  CHECK(*v == Approx(std::sqrt(0.5)));
  CHECK_FALSE(semantic_alignment({}, "P", e).has_value());
}

TEST_CASE("local coherence compares each new sentence with its neighbours") {
  SurveyDocument post;
  post.sections.push_back(make_section("1", "T", "Alpha one. Beta two. Gamma three. Delta four."));
  const auto& s = post.sections[0].sentences;
  TableEmbedder e;
  e.table = {{s[0].text, {1, 0}}, {s[1].text, {0, 1}}, {s[2].text, {1, 1}}, {s[3].text, {1, 0}}};
  std::vector<AlignedSentence> u{{"1", s[2]}};
  // Window k=2 around index 2: indices 0, 1, 3.
  const double expected =
      (oracle::cosine({1, 1}, {1, 0}) + oracle::cosine({1, 1}, {0, 1}) +
       oracle::cosine({1, 1}, {1, 0})) / 3;
  const auto v = local_coherence(u, post, 2, e);
  REQUIRE(v.has_value());
  CHECK(*v == Approx(expected));
}

TEST_CASE("routing accuracy at one and three") {
  std::vector<RoutingOutcome> o{{{"2", "1", "3"}, "2"}, {{"1", "2", "3"}, "2"}, {{"1", "3", "4"}, "2"},
                                {{}, "2"}};
  const auto acc = routing_accuracy(o);
  CHECK(acc.n == 4);
  CHECK(acc.acc1 == Approx(0.25));
  CHECK(acc.acc3 == Approx(0.5));
}

TEST_CASE("abstention precision and recall from published confusion counts") {
  // Survey 1 of the abstention table: TP 13, TN 28, FP 3, FN 1.
  AbstentionCounts c;
  for (int i = 0; i < 13; ++i) c.add(true, true);
  for (int i = 0; i < 28; ++i) c.add(false, false);
  for (int i = 0; i < 3; ++i) c.add(false, true);
  c.add(true, false);
  const auto s = abstention_pr(c);
  CHECK(*s.precision == Approx(13.0 / 16.0));
  CHECK(*s.recall == Approx(13.0 / 14.0));
  CHECK(std::round(*s.precision * 100) / 100 == Approx(0.81));
  CHECK(std::round(*s.recall * 100) / 100 == Approx(0.93));
  const auto empty = abstention_pr({});
  CHECK_FALSE(empty.precision.has_value());
  CHECK_FALSE(empty.recall.has_value());
}

TEST_CASE("table fidelity counts exact and similar fields") {
  TableRow gold{{"Method", std::string("Adversarial Transformation Networks")},
                {"Box", std::string("White box")},
                {"Strength", std::int64_t{4}}};
  TableRow pred{{"Method", std::string("ATN")},
                {"Box", std::string("  white   BOX ")},
                {"Strength", std::int64_t{3}}};
  auto s = table_fidelity(pred, gold, nullptr, 0.6);
  CHECK(s.exact_match == Approx(1.0 / 3));
  CHECK(s.fidelity == Approx(1.0 / 3));
  TableEmbedder e;
  e.table = {{"ATN", {1, 0.2}}, {"Adversarial Transformation Networks", {1, 0}}, {"3", {1, 0}},
             {"4", {0, 1}}};
  s = table_fidelity(pred, gold, &e, 0.6);
  CHECK(s.fidelity == Approx(2.0 / 3));
  CHECK(s.exact_match == Approx(1.0 / 3));
}

TEST_CASE("aggregation gives macro, micro and sample deviation") {
  std::vector<GroupedValue> v{{"a", 1.0}, {"a", 3.0}, {"b", 5.0}, {"b", std::nullopt}};
  const auto agg = aggregate(v);
  CHECK(agg.per_group.at("a").mean == Approx(2.0));
  CHECK(agg.per_group.at("a").stddev == Approx(std::sqrt(2.0)));
  CHECK(agg.per_group.at("b").n == 1);
  CHECK(*agg.macro == Approx(3.5));
  CHECK(*agg.micro == Approx(3.0));
  CHECK(*agg.macro_stddev == Approx(std::sqrt(4.5)));
  CHECK_FALSE(aggregate({}).macro.has_value());
}

TEST_CASE("metric settings reject unsupported values") {
  MetricSettings s;
  CHECK_NOTHROW(s.validate());
  s.bleu_smoothing = "none";
  CHECK_THROWS_AS(s.validate(), Error);
}
