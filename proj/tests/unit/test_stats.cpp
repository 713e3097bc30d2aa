#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "streamcheck/alignment.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/stats.hpp"

using namespace streamcheck;

namespace {

SessionEvent timeline(double t, const std::vector<std::tuple<std::string, double, double>>& ivs) {
  SessionEvent e;
  e.kind = EventKind::timeline;
  e.stream_time = t;
  Json arr = Json::array();
  for (const auto& [id, a, b] : ivs) arr.push_back({{"speaker_id", id}, {"t_start", a}, {"t_end", b}});
  e.payload = {{"intervals", arr}};
  return e;
}

SessionEvent verdict(double t, const std::string& speaker, const std::string& label, const std::string& topic) {
  SessionEvent e;
  e.kind = EventKind::verdict;
  e.stream_time = t;
  e.payload = {{"speaker_id", speaker}, {"label", label}, {"topic", topic}};
  return e;
}

// Union length where intervals closer than `gap` are bridged.
double oracle_talk_time(std::vector<std::pair<double, double>> ivs, double gap) {
  std::sort(ivs.begin(), ivs.end());
  double total = 0.0;
  bool open = false;
  double a = 0.0, b = 0.0;
  for (const auto& [s, e] : ivs) {
    if (!(e > s)) continue;
    if (open && s - b < gap) {
      b = std::max(b, e);
      continue;
    }
    if (open) total += b - a;
    a = s;
    b = e;
    open = true;
  }
  if (open) total += b - a;
  return total;
}

}  // namespace

TEST(SessionStats, EmptySession) {
  SessionStats stats;
  const auto s = stats.snapshot();
  EXPECT_TRUE(s.speakers.empty());
  EXPECT_EQ(s.verdicts, 0u);
  ASSERT_EQ(s.topics.size(), 8u);
  for (const auto& [t, n] : s.topics) EXPECT_EQ(n, 0u) << t;
}

TEST(SessionStats, CountsAndTalkTime) {
  SessionStats stats;
  stats.apply(timeline(5, {{"SPEAKER_00", 0, 4}, {"SPEAKER_01", 4.5, 5}}));
  stats.apply(timeline(6, {{"SPEAKER_00", 4.1, 6}}));  // bridged: gap 0.1 < 0.25
  stats.apply(verdict(6, "SPEAKER_00", "Supported", "B"));
  stats.apply(verdict(6, "SPEAKER_00", "Refuted", "B"));
  stats.apply(verdict(7, "SPEAKER_01", "Unverified", "Z"));
  stats.apply(verdict(7, "SPEAKER_09", "Refuted", "A"));
  const auto s = stats.snapshot();
  ASSERT_EQ(s.speakers.size(), 3u);
  EXPECT_EQ(s.speakers[0].speaker_id, "SPEAKER_00");
  EXPECT_DOUBLE_EQ(s.speakers[0].talk_time_seconds, 6.0);
  EXPECT_EQ(s.speakers[0].supported, 1u);
  EXPECT_EQ(s.speakers[0].disputed, 1u);
  EXPECT_DOUBLE_EQ(s.speakers[1].talk_time_seconds, 0.5);
  EXPECT_EQ(s.speakers[1].unverified, 1u);
  // Never seen on the timeline.
  EXPECT_EQ(s.speakers[2].speaker_id, kUnknownSpeaker);
  EXPECT_EQ(s.speakers[2].disputed, 1u);
  EXPECT_EQ(s.topics.at('B'), 2u);
  EXPECT_EQ(s.topics.at('H'), 1u);  // invalid topic letter folds into H
  EXPECT_EQ(s.topics.at('A'), 1u);
  EXPECT_EQ(s.verdicts, 4u);
  EXPECT_DOUBLE_EQ(s.session_clock, 7.0);
}

TEST(SessionStats, JsonRoundTrip) {
  SessionStats stats;
  stats.apply(timeline(5, {{"SPEAKER_00", 0, 4}}));
  stats.apply(verdict(6, "SPEAKER_00", "Supported", "C"));
  const auto s = stats.snapshot();
  EXPECT_EQ(StatsSnapshot::from_json(s.to_json()), s);
  EXPECT_THROW(StatsSnapshot::from_json(Json{{"speakers", 3}}), SchemaViolation);
}

// Random logs against an independent counting oracle: per-speaker and
// per-topic counters are conserved, talk time matches the bridged union,
// and every prefix snapshot equals a fresh fold of that prefix.
TEST(SessionStats, RandomLogsMatchCountingOracle) {
  std::mt19937 rng(99);
  const std::vector<std::string> labels = {"Supported", "Refuted", "Unverified"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SessionEvent> log;
    std::map<std::string, std::vector<std::pair<double, double>>> ivs;
    double t = 0.0;
    for (int i = 0; i < 500; ++i) {
      t += std::uniform_real_distribution<double>(0.0, 0.5)(rng);
      const std::string spk = "SPEAKER_0" + std::to_string(rng() % 4);
      if (rng() % 3 == 0) {
        log.push_back(verdict(t, spk, labels[rng() % 3], std::string(1, static_cast<char>('A' + rng() % 8))));
      } else {
        const double a = std::max(0.0, t - std::uniform_real_distribution<double>(0.0, 2.0)(rng));
        log.push_back(timeline(t, {{spk, a, t}}));
      }
    }
    SessionStats stats;
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<char, std::size_t> topics;
    std::size_t verdicts = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto& e = log[i];
      stats.apply(e);
      if (e.kind == EventKind::timeline) {
        for (const auto& iv : e.payload["intervals"])
          ivs[iv["speaker_id"]].emplace_back(iv["t_start"].get<double>(), iv["t_end"].get<double>());
      } else {
        std::string spk = e.payload["speaker_id"];
        if (oracle_talk_time(ivs[spk], 0.25) == 0.0) spk = kUnknownSpeaker;
        ++counts[spk][e.payload["label"]];
        ++topics[e.payload["topic"].get<std::string>()[0]];
        ++verdicts;
      }
      if (i % 97 == 0) {
        SessionStats fresh;
        for (std::size_t j = 0; j <= i; ++j) fresh.apply(log[j]);
        EXPECT_EQ(fresh.snapshot(), stats.snapshot());
      }
    }
    const auto s = stats.snapshot();
    EXPECT_EQ(s, stats.snapshot());
    EXPECT_EQ(s.verdicts, verdicts);
    std::size_t sum_claims = 0, sum_topics = 0;
    for (const auto& sp : s.speakers) {
      EXPECT_EQ(sp.claims_total, sp.supported + sp.disputed + sp.unverified);
      EXPECT_EQ(sp.supported, counts[sp.speaker_id]["Supported"]);
      EXPECT_EQ(sp.disputed, counts[sp.speaker_id]["Refuted"]);
      EXPECT_EQ(sp.unverified, counts[sp.speaker_id]["Unverified"]);
      if (sp.speaker_id != kUnknownSpeaker)
        EXPECT_NEAR(sp.talk_time_seconds, oracle_talk_time(ivs[sp.speaker_id], 0.25), 1e-9);
      sum_claims += sp.claims_total;
    }
    for (const auto& [c, n] : s.topics) {
      EXPECT_EQ(n, topics[c]);
      sum_topics += n;
    }
    EXPECT_EQ(sum_claims, verdicts);
    EXPECT_EQ(sum_topics, verdicts);
  }
}
