#include <cmath>

#include "doctest.h"
#include "livesurvey/error.hpp"
#include "livesurvey/lenient_json.hpp"
#include "livesurvey/mock.hpp"
#include "livesurvey/prompts.hpp"

using namespace livesurvey;

namespace {
ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}
}  // namespace

TEST_CASE("lenient json tolerates fences, prose, reasoning and trailing commas") {
  const auto j = parse_lenient_json(
      "<think>{\"x\": 0}</think>Sure! Here you go:\n```json\n{\"a\": [1, 2,], \"b\": \"}\",}\n```\nThanks.",
      JsonShape::kObject);
  CHECK(j["a"] == nlohmann::json::array({1, 2}));
  CHECK(j["b"] == "}");
  CHECK(parse_lenient_json("ids: [\"3\", \"1\", \"2\"].", JsonShape::kArray).size() == 3);
}

TEST_CASE("lenient json rejects broken or missing payloads") {
  CHECK(kind_of([] { parse_lenient_json("no json here", JsonShape::kObject); }) ==
        ErrorKind::kParse);
  CHECK(kind_of([] { parse_lenient_json("{\"a\": }", JsonShape::kObject); }) == ErrorKind::kParse);
  CHECK(kind_of([] { parse_lenient_json("{\"a\": 1", JsonShape::kObject); }) == ErrorKind::kParse);
}

TEST_CASE("trailing comma removal leaves strings alone") {
  CHECK(remove_trailing_commas(R"({"a": ",}", "b": [1,],})") == R"({"a": ",}", "b": [1]})");
}

TEST_CASE("reasoning blocks are stripped, dangling ones too") {
  CHECK(strip_reasoning("a<think>b</think>c") == "ac");
  CHECK(strip_reasoning("keep<think>never closed") == "keep");
}

TEST_CASE("prompt rendering substitutes known placeholders only") {
  CHECK(prompts::render("Hi {name}, {other} {x\n}", {{"name", "Ann"}}) == "Hi Ann, {other} {x\n}");
  CHECK(prompts::render(prompts::kAbstention, {}).find("TRUE") != std::string::npos);
  CHECK(prompts::retry_hint(1, "bad").find("attempt=1") != std::string::npos);
}

TEST_CASE("scripted generator prefers exact keys and reports gaps") {
  ScriptedGenerator gen(2);
  gen.add("analysis", std::string(kAnyPaper), "generic");
  gen.add("analysis", "p1", "specific");
  GenerationRequest r{"analysis", "p1", 0, {{"user", "x"}}};
  CHECK(gen.generate(r) == "specific");
  r.paper_id = "p2";
  CHECK(gen.generate(r) == "generic");
  r.attempt = 1;
  CHECK(kind_of([&] { gen.generate(r); }) == ErrorKind::kScriptGap);
  CHECK(gen.calls().size() == 3);
  CHECK(gen.max_retries() == 2);
}

TEST_CASE("scripted generator loads from json") {
  const auto j = nlohmann::json::parse(R"({"max_retries": 0, "responses": [
    {"role": "abstention", "paper": "p1", "response": "TRUE"},
    {"role": "table_synthesis", "paper": "p1", "response_json": {"Method": "X"}}]})");
  auto gen = ScriptedGenerator::from_json(j, ".");
  CHECK(gen->max_retries() == 0);
  CHECK(gen->generate({"abstention", "p1", 0, {}}) == "TRUE");
  CHECK(nlohmann::json::parse(gen->generate({"table_synthesis", "p1", 0, {}}))["Method"] == "X");
}

TEST_CASE("hash embedder is deterministic, normalized and seed dependent") {
  HashEmbedder a(7, 32), b(7, 32), c(8, 32);
  const auto va = a.embed_one("Faster R-CNN proposals");
  CHECK(va == b.embed_one("Faster R-CNN proposals"));
  CHECK(va != c.embed_one("Faster R-CNN proposals"));
  CHECK(va == a.embed_one("faster r-cnn PROPOSALS"));
  double norm = 0;
  for (double x : va) norm += x * x;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  const auto empty = a.embed_one("   ");
  CHECK(empty[0] == 1.0);
  CHECK(a.embed(std::vector<std::string>{"x", "y"}).size() == 2);
  CHECK(a.model_id().find("32") != std::string::npos);
}
