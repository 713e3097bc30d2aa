#include <gtest/gtest.h>

#include <map>
#include <set>

#include "streamcheck/error.hpp"
#include "streamcheck/http_backends.hpp"
#include "streamcheck/session.hpp"
#include "test_support.hpp"

using namespace streamcheck;
using namespace streamcheck::testing;

namespace {

BackendSet mock(const std::string& fixture = "debate_mini", const std::string& options = "") {
  return resolve_backends("mock:" + fixture + options, STREAMCHECK_TEST_FIXTURES);
}

StreamSource wav(const std::string& fixture = "debate_mini") {
  return StreamSource::from_locator(source_fixture(fixture + ".wav"));
}

std::vector<std::string> run_lines(const std::string& fixture, const std::string& options = "") {
  Session s("s1", wav(fixture), EngineConfig{}, mock(fixture, options), {true, ""});
  s.start();
  EXPECT_EQ(s.wait(), SessionState::finished);
  std::vector<std::string> lines;
  for (const auto& e : s.log()->events()) lines.push_back(e->line);
  return lines;
}

}  // namespace

TEST(Session, DebateMiniEndToEnd) {
  Session s("s1", wav(), EngineConfig{}, mock(), {true, ""});
  EXPECT_EQ(s.state(), SessionState::created);
  s.start();
  ASSERT_EQ(s.wait(), SessionState::finished);
  const auto events = s.log()->events();
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front()->event.kind, EventKind::session_status);
  EXPECT_EQ(events.front()->event.payload["state"], "running");
  EXPECT_EQ(events.back()->event.payload["state"], "finished");
  EXPECT_EQ(events.back()->event.payload["end_reason"], "end_of_file");
  EXPECT_TRUE(s.log()->closed());

  std::map<std::string, int> labels;
  std::map<std::string, std::vector<EventKind>> per_claim;
  double last_time = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i]->event;
    EXPECT_EQ(e.event_id, i + 1);
    EXPECT_GE(e.stream_time, last_time) << "event " << e.event_id;
    last_time = e.stream_time;
    EXPECT_EQ(e.wall_time, 0.0);
    if (e.payload.contains("claim_id")) per_claim[e.payload["claim_id"]].push_back(e.kind);
    if (e.kind == EventKind::verdict) {
      ++labels[e.payload["label"]];
      ASSERT_LT(i + 1, events.size());
      EXPECT_EQ(events[i + 1]->event.kind, EventKind::stats_snapshot);
    }
  }
  EXPECT_EQ(labels, (std::map<std::string, int>{{"Supported", 3}, {"Refuted", 4}, {"Unverified", 1}}));
  for (const auto& [id, kinds] : per_claim)
    EXPECT_EQ(kinds, (std::vector<EventKind>{EventKind::claim_detected, EventKind::evidence_ready, EventKind::verdict}))
        << id;

  const auto m = s.metrics();
  EXPECT_EQ(m.claims, 8u);
  EXPECT_EQ(m.suppressed_duplicates, 1u);
  EXPECT_EQ(m.claim_latencies.size(), 8u);
  const auto st = s.stats();
  EXPECT_EQ(st.verdicts, 8u);
  // The last snapshot event equals the session's fold.
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if ((*it)->event.kind != EventKind::stats_snapshot) continue;
    EXPECT_EQ(StatsSnapshot::from_json((*it)->event.payload).verdicts, st.verdicts);
    break;
  }
  std::set<std::string> speakers;
  for (const auto& sp : st.speakers) {
    speakers.insert(sp.speaker_id);
    EXPECT_GT(sp.talk_time_seconds, 0.0) << sp.speaker_id;
  }
  EXPECT_EQ(speakers, (std::set<std::string>{"SPEAKER_00", "SPEAKER_01"}));
}

TEST(Session, ReplayIsByteIdentical) { EXPECT_EQ(run_lines("debate_mini"), run_lines("debate_mini")); }

TEST(Session, LocalSpeakerOrderDoesNotMatter) {
  const auto base = run_lines("overlap_speakers");
  for (int seed : {1, 2, 3}) EXPECT_EQ(run_lines("overlap_speakers", "?permutation_seed=" + std::to_string(seed)), base);
}

TEST(Session, FaultyBackendsDegradeButFinish) {
  Session s("s1", wav("faulty_backends"), EngineConfig{}, mock("faulty_backends"), {true, ""});
  s.start();
  ASSERT_EQ(s.wait(), SessionState::finished);
  std::size_t dropped = 0, unknown = 0;
  bool all_failed_seen = false;
  for (const auto& e : s.log()->events()) {
    const auto& ev = e->event;
    if (ev.kind == EventKind::dropped_audio) ++dropped;
    if (ev.kind == EventKind::transcript && ev.payload["speaker_id"] == "UNKNOWN") ++unknown;
    if (ev.kind == EventKind::evidence_ready && ev.payload["all_backends_failed"].get<bool>()) all_failed_seen = true;
  }
  EXPECT_GE(dropped, 1u);
  EXPECT_GE(unknown, 1u);  // segmentation fault leaves a hole in the timeline
  EXPECT_TRUE(all_failed_seen);
  EXPECT_EQ(s.metrics().claims, 6u);
  EXPECT_GE(s.metrics().classifier_errors, 1u);
}

TEST(Session, Lifecycle) {
  EngineConfig c;
  c.realtime = true;
  Session s("s1", wav(), c, mock(), {true, ""});
  EXPECT_THROW(s.stop(), IllegalTransition);
  EXPECT_EQ(s.start(), SessionState::running);
  EXPECT_THROW(s.start(), IllegalTransition);
  sleep_ms(1200);
  EXPECT_EQ(s.stop(), SessionState::stopped);
  EXPECT_THROW(s.stop(), IllegalTransition);
  EXPECT_THROW(s.start(), IllegalTransition);
  const auto events = s.log()->events();
  EXPECT_EQ(events.back()->event.payload["state"], "stopped");
  EXPECT_LT(events.back()->event.stream_time, 10.0);
}

TEST(Session, UnreachableSourceFails) {
  Session s("s1", StreamSource::from_locator("/no/such/file.wav"), EngineConfig{}, mock());
  EXPECT_THROW(s.start(), UnreachableSource);
  EXPECT_EQ(s.state(), SessionState::failed);
  EXPECT_FALSE(s.failure_reason().empty());
  EXPECT_EQ(s.describe()["state"], "failed");
  EXPECT_EQ(s.log()->events().back()->event.payload["state"], "failed");
}

TEST(Session, RejectsIncompleteBackendsAndBadConfig) {
  BackendSet b = mock();
  b.nli.reset();
  EXPECT_THROW(Session("s", wav(), EngineConfig{}, b), InvalidConfig);
  EngineConfig c;
  c.diarization.tau_active = 1.5;
  EXPECT_THROW(Session("s", wav(), c, mock()), InvalidConfig);
}

TEST(Session, JsonlMatchesLog) {
  TempDir dir;
  Session s("s1", wav(), EngineConfig{}, mock(), {true, dir.file("s.jsonl")});
  s.start();
  s.wait();
  std::string expected;
  for (const auto& e : s.log()->events()) expected += e->line + "\n";
  EXPECT_EQ(read_file(dir.file("s.jsonl")), expected);
}

TEST(SessionManager, IndependentSessions) {
  TempDir dir;
  SessionManager mgr([](const std::string& spec) { return resolve_backends(spec, STREAMCHECK_TEST_FIXTURES); },
                     "mock:debate_mini", dir.path().string());
  auto a = mgr.create(wav(), {});
  auto b = mgr.create(wav(), {});
  EXPECT_NE(a->id(), b->id());
  EXPECT_EQ(mgr.list().size(), 2u);
  EXPECT_EQ(mgr.get(a->id()), a);
  EXPECT_THROW(mgr.get("session-99"), UnknownSession);
  EXPECT_THROW(mgr.create(wav(), {{"tau_active", "1.5"}}), InvalidConfig);
  a->start();
  b->start();
  EXPECT_EQ(a->wait(), SessionState::finished);
  EXPECT_EQ(b->wait(), SessionState::finished);
  EXPECT_EQ(a->stats().verdicts, b->stats().verdicts);
  EXPECT_TRUE(std::filesystem::exists(dir.file(a->id() + ".jsonl")));
}
