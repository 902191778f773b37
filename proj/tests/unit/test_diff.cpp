#include <random>

#include "doctest.h"
#include "livesurvey/diff.hpp"
#include "livesurvey/error.hpp"
#include "livesurvey/text.hpp"
#include "oracles.hpp"

using namespace livesurvey;

namespace {
const std::filesystem::path kData = LIVESURVEY_TEST_DATA;

std::vector<int> random_seq(std::mt19937& rng, int max_len, int alphabet) {
  std::uniform_int_distribution<int> len(0, max_len), sym(0, alphabet - 1);
  std::vector<int> v(len(rng));
  for (auto& x : v) x = sym(rng);
  return v;
}

TokenStream single_region(const std::vector<int>& seq) {
  TokenStream s;
  for (int x : seq) {
    s.tokens.push_back("t" + std::to_string(x));
    s.regions.push_back("section:1");
  }
  return s;
}
}  // namespace

TEST_CASE("lcs matches the dynamic-programming oracle on random inputs") {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 600; ++trial) {
    const int alphabet = 2 + trial % 6;
    const auto a = random_seq(rng, 40, alphabet);
    const auto b = random_seq(rng, 40, alphabet);
    const std::size_t expected = oracle::lcs(a, b);
    CHECK(lcs_length(a, b) == expected);
    CHECK(edit_distance(a, b) == a.size() + b.size() - 2 * expected);
  }
}

TEST_CASE("edit scripts are minimal and reproduce the target") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_seq(rng, 60, 4);
    const auto b = random_seq(rng, 60, 4);
    const auto sa = single_region(a), sb = single_region(b);
    const auto script = diff_streams(sa, sb);
    CHECK(delta_tokens(script) == a.size() + b.size() - 2 * oracle::lcs(a, b));
    CHECK(apply_edit_script(sa.tokens, script) == sb.tokens);
  }
}

TEST_CASE("identical documents produce an empty script") {
  const auto doc = load_document(kData / "survey.json");
  CHECK(token_diff(doc, doc).ops.empty());
  CHECK(new_sentences(doc, doc).empty());
}

TEST_CASE("a pure insertion costs exactly its tokens and stays in scope") {
  const auto before = load_document(kData / "survey.json");
  auto after = before;
  const std::string added = "CenterNet [11] predicts object centres as keypoints.";
  auto& sec = *after.find_section("3");
  sec.sentences.insert(sec.sentences.begin() + 3, Sentence{"3:7", added});
  const auto script = token_diff(before, after);
  CHECK(delta_tokens(script) == oracle::tokens(added).size());
  CHECK(delta_out(script, {section_region("3")}) == 0);
  CHECK(delta_out(script, {section_region("2")}) == delta_tokens(script));
  const auto u = new_sentences(before, after);
  REQUIRE(u.size() == 1);
  CHECK(u[0].section_id == "3");
  CHECK(u[0].sentence.text == added);
}

TEST_CASE("tokens never match across regions") {
  TokenStream a, b;
  a.tokens = {"x"};
  a.regions = {"section:1"};
  b.tokens = {"x"};
  b.regions = {"section:2"};
  const auto script = diff_streams(a, b);
  REQUIRE(script.ops.size() == 2);
  CHECK(delta_out(script, {"section:2"}) == 1);
}

TEST_CASE("table rows are part of the token stream") {
  const auto before = load_document(kData / "survey.json");
  auto after = before;
  auto& table = *after.find_table("2");
  TableRow row{{"Dataset", std::string("LVIS")},
               {"Task", std::string("Segmentation")},
               {"Classes", std::int64_t{1000}}};
  table.rows.push_back(row);
  const auto script = token_diff(before, after);
  CHECK(delta_tokens(script) == 3);
  CHECK(delta_out(script, {table_region("2")}) == 0);
}

TEST_CASE("a corrupted script is rejected") {
  EditScript bad;
  bad.ops.push_back({EditKind::kDelete, 0, "nope", "section:1"});
  std::vector<std::string> before{"yes"};
  CHECK_THROWS_AS(apply_edit_script(before, bad), Error);
}
