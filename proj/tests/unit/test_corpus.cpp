#include "doctest.h"
#include "livesurvey/corpus.hpp"
#include "livesurvey/document.hpp"
#include "livesurvey/error.hpp"

using namespace livesurvey;

namespace {
const std::filesystem::path kData = LIVESURVEY_TEST_DATA;

std::vector<std::string> ids(const std::vector<PaperRecord>& papers) {
  std::vector<std::string> out;
  for (const auto& p : papers) out.push_back(p.id);
  return out;
}
}  // namespace

TEST_CASE("matching filter keeps the whole feed in order") {
  const auto papers = ingest_feed(kData / "feed.ndjson", CandidateFilter{});
  CHECK(ids(papers) == std::vector<std::string>{"f1", "f2", "f3", "f4", "f5"});
}

TEST_CASE("date range excludes papers by predicate") {
  CandidateFilter filter;
  filter.date_start = "2023-01-01";
  filter.date_end = "2023-12-31";
  const auto all = ingest_feed(kData / "feed.ndjson", CandidateFilter{});
  std::size_t expected = 0;
  for (const auto& p : all) expected += p.date >= "2023-01-01" && p.date <= "2023-12-31";
  const auto kept = ingest_feed(kData / "feed.ndjson", filter);
  CHECK(kept.size() == expected);
  CHECK(kept.size() == 3);
}

TEST_CASE("empty feed yields no candidates") {
  CHECK(ingest_feed_text("", CandidateFilter{}).empty());
  CHECK(ingest_feed_text("\n  \n", CandidateFilter{}).empty());
}

TEST_CASE("malformed feed names the line") {
  try {
    ingest_feed_text(R"({"id":"a","title":"t","date":"2024-01-01","bib":{"key":"k"}})"
                     "\nnot json\n",
                     CandidateFilter{});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("peer review, venue and category predicates") {
  const auto all = ingest_feed(kData / "feed.ndjson", CandidateFilter{});
  CandidateFilter reviewed;
  reviewed.require_peer_reviewed = true;
  for (const auto& p : ingest_feed(kData / "feed.ndjson", reviewed)) CHECK(p.venue != "preprint");
  CandidateFilter cats;
  cats.allowed_categories = {"cs.CV"};
  for (const auto& p : ingest_feed(kData / "feed.ndjson", cats)) {
    CHECK(std::find(p.categories.begin(), p.categories.end(), "cs.CV") != p.categories.end());
  }
}

TEST_CASE("tightening a filter never grows the result") {
  CandidateFilter loose;
  CandidateFilter tight = loose;
  tight.allowed_venues = {"CVPR", "preprint"};
  CandidateFilter tighter = tight;
  tighter.require_peer_reviewed = true;
  CandidateFilter tightest = tighter;
  tightest.date_start = "2023-06-01";
  const auto f = kData / "feed.ndjson";
  const auto a = ingest_feed(f, loose).size(), b = ingest_feed(f, tight).size(),
             c = ingest_feed(f, tighter).size(), d = ingest_feed(f, tightest).size();
  CHECK(a >= b);
  CHECK(b >= c);
  CHECK(c >= d);
}

TEST_CASE("filter validation") {
  CandidateFilter bad;
  bad.date_start = "2024-02-01";
  bad.date_end = "2024-01-01";
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(is_iso_date("2024-02-29"));
  CHECK_FALSE(is_iso_date("2023-02-29"));
  CHECK(filter_from_json({{"date_range", {"2020-01-01", "2021-01-01"}}}).date_end == "2021-01-01");
}

TEST_CASE("scope requires a core criterion and summaries render headed text") {
  CHECK_THROWS_AS(scope_from_json({{"title", "x"}, {"core_criterion", ""}}), Error);
  PaperSummary s{"m", "n", "r", "p"};
  CHECK(s.valid());
  CHECK(s.render() == "### Methods\nm\n\n### Novelty\nn\n\n### Results\nr");
}
