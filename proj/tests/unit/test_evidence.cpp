#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "streamcheck/error.hpp"
#include "streamcheck/evidence.hpp"
#include "streamcheck/mock_backends.hpp"
#include "test_support.hpp"

using namespace streamcheck;
using namespace streamcheck::testing;

namespace {

EvidenceDoc doc(std::string url, std::string title, std::string snippet, std::string backend = "web") {
  EvidenceDoc d;
  d.url = std::move(url);
  d.canonical_url = canonicalize_url(d.url);
  d.title = std::move(title);
  d.snippet = std::move(snippet);
  d.source_backend = std::move(backend);
  return d;
}

std::vector<std::string> urls(const std::vector<EvidenceDoc>& docs) {
  std::vector<std::string> out;
  for (const auto& d : docs) out.push_back(d.url);
  return out;
}

std::shared_ptr<SearchBackend> returning(std::vector<EvidenceDoc> docs) {
  return std::make_shared<FnSearch>([docs](const SearchQuery& q) {
    std::vector<EvidenceDoc> out(docs.begin(), docs.begin() + std::min(docs.size(), q.k));
    return out;
  });
}

}  // namespace

TEST(Canonicalize, DropsTrackingFragmentPortAndSlash) {
  EXPECT_EQ(canonicalize_url("HTTPS://Example.COM:443/a/b/?utm_source=x&id=3&fbclid=9#frag"),
            "https://example.com/a/b?id=3");
  EXPECT_EQ(canonicalize_url("http://example.com:80/"), "http://example.com");
  EXPECT_EQ(canonicalize_url("http://example.com:8080/x"), "http://example.com:8080/x");
  EXPECT_EQ(url_host("https://www.politifact.com/x"), "www.politifact.com");
}

TEST(Gather, CardinalityBound) {
  std::vector<EvidenceDoc> five;
  for (int i = 0; i < 8; ++i) five.push_back(doc("https://a.example/" + std::to_string(i), "t", "s"));
  std::vector<NamedSearchBackend> backends{{"one", returning(five)}, {"two", returning(five)}};
  const auto r = gather({"q1", "q2"}, "claim-0001", "en", backends, {5, 3.0});
  EXPECT_LE(r.docs.size(), 20u);
  EXPECT_EQ(r.docs.size(), 20u);
  EXPECT_EQ(r.calls, 4u);
  for (const auto& d : r.docs) EXPECT_FALSE(d.canonical_url.empty());
}

TEST(Gather, TimedOutBackendIsTolerated) {
  auto slow = std::make_shared<FnSearch>([](const SearchQuery&) {
    sleep_ms(800);
    return std::vector<EvidenceDoc>{doc("https://slow.example/x", "t", "s")};
  });
  std::vector<NamedSearchBackend> backends{{"slow", slow}, {"fast", returning({doc("https://fast.example/y", "t", "s")})}};
  const auto r = gather({"q"}, "claim-0001", "en", backends, {5, 0.2});
  ASSERT_EQ(r.docs.size(), 1u);
  EXPECT_EQ(r.docs[0].source_backend, "fast");
  EXPECT_EQ(r.failures, 1u);
  EXPECT_FALSE(r.all_failed());
}

TEST(Gather, AllBackendsFailing) {
  auto broken = std::make_shared<FnSearch>([](const SearchQuery&) -> std::vector<EvidenceDoc> { throw BackendError("x"); });
  const auto r = gather({"q1", "q2"}, "c", "en", {{"a", broken}, {"b", broken}}, {});
  EXPECT_TRUE(r.docs.empty());
  EXPECT_TRUE(r.all_failed());
}

TEST(Gather, OverlappingResultsAreKeptUntilDedupe) {
  auto same = returning({doc("https://a.example/x", "t", "s")});
  const auto r = gather({"q1", "q2"}, "c", "en", {{"a", same}, {"b", same}}, {});
  EXPECT_EQ(r.docs.size(), 4u);
  EXPECT_EQ(dedupe(r.docs).size(), 1u);
}

TEST(Gather, SnippetsAreCapped) {
  const auto r = gather({"q"}, "c", "en", {{"a", returning({doc("https://a.example/", "t", std::string(5000, 'x'))})}}, {});
  ASSERT_EQ(r.docs.size(), 1u);
  EXPECT_EQ(r.docs[0].snippet.size(), kMaxSnippetBytes);
}

TEST(Filter, HostBasedBlocklist) {
  const auto bl = default_blocklist();
  const auto out = filter_factcheck_sites({doc("https://www.politifact.com/x", "a", "s"),
                                           doc("https://news.example.com/politifact-says", "b", "s"),
                                           doc("https://notsnopes.com/x", "c", "s")},
                                          bl);
  EXPECT_EQ(urls(out.evidence),
            (std::vector<std::string>{"https://news.example.com/politifact-says", "https://notsnopes.com/x"}));
}

TEST(Filter, InternalIndexDocsRoutedToPreviousFactChecks) {
  const auto out = filter_factcheck_sites({doc("https://www.politifact.com/x", "a", "s", "factindex")},
                                          default_blocklist(), "factindex");
  EXPECT_TRUE(out.evidence.empty());
  ASSERT_EQ(out.previous_fact_checks.size(), 1u);
}

TEST(Filter, BlocklistFile) {
  TempDir dir;
  const auto path = dir.write("bl.txt", "# comment\nexample.org\n\n  Other.NET  # trailing\n");
  EXPECT_EQ(load_blocklist(path), (std::set<std::string>{"example.org", "other.net"}));
  EXPECT_THROW(load_blocklist(dir.file("missing.txt")), InvalidConfig);
  const auto shipped = load_blocklist(std::string(STREAMCHECK_TEST_CONFIG) + "/blocklist.txt");
  for (const auto& d : default_blocklist()) EXPECT_TRUE(shipped.count(d)) << d;
}

TEST(Dedupe, TrackingParametersCollapse) {
  const auto out = dedupe({doc("https://a.example/x", "T", "one"), doc("https://a.example/x?utm_source=x", "T2", "two")});
  EXPECT_EQ(out.size(), 1u);
}

TEST(Dedupe, HandComputedJaccardKeepsBoth) {
  const auto out = dedupe({doc("https://a.example/1", "first", "a b c d e f"), doc("https://a.example/2", "second", "a b c d e g")},
                          0.7);
  EXPECT_EQ(out.size(), 2u);
}

TEST(Dedupe, IdenticalSnippetsKeepSmallerUrl) {
  const auto out = dedupe({doc("https://b.example/", "B", "same text here"), doc("https://a.example/", "A", "same text here")});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].url, "https://a.example/");
}

TEST(Dedupe, CaseFoldedTitlePass) {
  const auto out = dedupe({doc("https://a.example/1", "Jobs  Report", "alpha beta gamma delta"),
                           doc("https://b.example/2", "jobs report", "omega psi chi phi upsilon")});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].snippet, "omega psi chi phi upsilon");  // longer snippet survives
}

TEST(Dedupe, IdempotentAndOrderInvariant) {
  std::mt19937 rng(17);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f", "g"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<EvidenceDoc> docs;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      std::string snip;
      for (int w = 0, len = 2 + static_cast<int>(rng() % 5); w < len; ++w) snip += vocab[rng() % vocab.size()] + " ";
      docs.push_back(doc("https://h" + std::to_string(rng() % 5) + ".example/" + std::to_string(rng() % 3),
                         "title " + std::to_string(rng() % 6), snip));
    }
    const auto once = dedupe(docs);
    EXPECT_EQ(urls(dedupe(once)), urls(once));
    auto shuffled = docs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto other = dedupe(shuffled);
    ASSERT_EQ(other.size(), once.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_EQ(other[i].url, once[i].url);
      EXPECT_EQ(other[i].snippet, once[i].snippet);
    }
  }
}

TEST(Rank, ThresholdAndSort) {
  auto ranker = std::make_shared<FnRanker>([](const std::string&, const std::string& s) {
    return s == "d1" ? 0.9 : s == "d2" ? 0.05 : 0.5;
  });
  const auto out = rank("c", {doc("https://x/1", "1", "d1"), doc("https://x/2", "2", "d2"), doc("https://x/3", "3", "d3")}, ranker);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].doc.snippet, "d1");
  EXPECT_EQ(out[1].doc.snippet, "d3");
  EXPECT_EQ(out[0].rank, 1u);
  EXPECT_EQ(out[1].rank, 2u);
}

TEST(Rank, AllBelowThresholdIsEmpty) {
  auto ranker = std::make_shared<FnRanker>([](const std::string&, const std::string&) { return 0.01; });
  EXPECT_TRUE(rank("c", {doc("https://x/1", "1", "d1")}, ranker).empty());
}

TEST(Rank, EqualScoresAreUrlOrdered) {
  auto ranker = std::make_shared<FnRanker>([](const std::string&, const std::string&) { return 0.5; });
  const auto out = rank("c", {doc("https://x/c", "", "3"), doc("https://x/a", "", "1"), doc("https://x/b", "", "2")}, ranker);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].doc.url, "https://x/a");
  EXPECT_EQ(out[2].doc.url, "https://x/c");
}

TEST(Rank, FailedScoresDropDocsAndTopKTruncates) {
  auto ranker = std::make_shared<FnRanker>([](const std::string&, const std::string& s) -> double {
    if (s == "bad") throw BackendError("x");
    return 0.2 + 0.01 * static_cast<double>(s.size());
  });
  std::vector<EvidenceDoc> docs{doc("https://x/bad", "", "bad")};
  for (int i = 0; i < 8; ++i) docs.push_back(doc("https://x/" + std::to_string(i), "", std::string(i + 1, 'a')));
  RankOptions o;
  o.top_k = 5;
  const auto out = rank("c", docs, ranker, o);
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i - 1].relevance, out[i].relevance);
  for (const auto& r : out) EXPECT_NE(r.doc.snippet, "bad");
}

TEST(EvidenceStages, CountsNeverIncrease) {
  std::mt19937 rng(23);
  auto ranker = std::make_shared<FnRanker>([](const std::string&, const std::string& s) {
    return static_cast<double>(stable_hash(s) % 100) / 100.0;
  });
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvidenceDoc> docs;
    for (int i = 0, n = static_cast<int>(rng() % 15); i < n; ++i) {
      const std::string host = rng() % 4 == 0 ? "www.snopes.com" : "h" + std::to_string(rng() % 4) + ".example";
      docs.push_back(doc("https://" + host + "/" + std::to_string(rng() % 4), "t" + std::to_string(rng() % 8),
                         "s " + std::to_string(rng() % 6) + " x y z", rng() % 5 == 0 ? "factindex" : "web"));
    }
    const auto filtered = filter_factcheck_sites(docs, default_blocklist());
    const auto deduped = dedupe(filtered.evidence);
    const auto ranked = rank("c", deduped, ranker);
    EXPECT_LE(filtered.evidence.size(), docs.size());
    EXPECT_LE(deduped.size(), filtered.evidence.size());
    EXPECT_LE(ranked.size(), deduped.size());
    for (const auto& r : ranked) EXPECT_GE(r.relevance, 0.1);
  }
}

TEST(EvidenceStages, ScriptedSearchTimeoutTakesPartialPath) {
  const auto script = std::make_shared<FixtureScript>(load_script(source_fixture("faulty_backends.json")));
  const auto backends = make_mock_backends(script);
  const auto r = gather({"Did Candidate A cut federal healthcare funding?"}, "claim-0002", "en", backends.search, {});
  EXPECT_EQ(r.failures, 1u);
  EXPECT_FALSE(r.all_failed());
  ASSERT_EQ(r.docs.size(), 1u);
  EXPECT_EQ(r.docs[0].source_backend, "news");
}
