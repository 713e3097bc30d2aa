#include <gtest/gtest.h>

#include "streamcheck/api_server.hpp"
#include "streamcheck/http_backends.hpp"
#include "streamcheck/session.hpp"
#include "test_support.hpp"

using namespace streamcheck;
using namespace streamcheck::testing;

namespace {

class Api : public ::testing::Test {
 protected:
  Api()
      : manager_([](const std::string& spec) { return resolve_backends(spec, STREAMCHECK_TEST_FIXTURES); },
                 "mock:debate_mini"),
        server_(manager_) {}
  void SetUp() override { port_ = server_.start("127.0.0.1", 0); }
  void TearDown() override { server_.stop(); }

  std::string create_and_finish() {
    auto r = http_request(port_, "POST", "/sessions", {{"source", source_fixture("debate_mini.wav")}});
    EXPECT_EQ(r.status, 201);
    const std::string id = r.body["session_id"];
    EXPECT_EQ(http_request(port_, "POST", "/sessions/" + id + "/start").status, 200);
    manager_.get(id)->wait();
    return id;
  }

  SessionManager manager_;
  ApiServer server_;
  int port_ = 0;
};

}  // namespace

TEST_F(Api, SessionRoutes) {
  auto r = http_request(port_, "POST", "/sessions",
                        {{"source", source_fixture("debate_mini.wav")}, {"config", {{"top_k", "3"}}}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["state"], "created");
  const std::string id = r.body["session_id"];
  EXPECT_EQ(http_request(port_, "GET", "/sessions/" + id).body["state"], "created");
  EXPECT_EQ(http_request(port_, "POST", "/sessions/" + id + "/stop").status, 409);
  r = http_request(port_, "POST", "/sessions/" + id + "/start");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(http_request(port_, "POST", "/sessions/" + id + "/start").status, 409);
  manager_.get(id)->wait();
  r = http_request(port_, "GET", "/sessions/" + id + "/stats");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["session_id"], id);
  EXPECT_EQ(r.body["state"], "finished");
  EXPECT_EQ(r.body["verdicts"], 8);
  EXPECT_EQ(r.body["topics"].size(), 8u);
  r = http_request(port_, "GET", "/sessions");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["sessions"].size(), 1u);
}

TEST_F(Api, Errors) {
  EXPECT_EQ(http_request(port_, "GET", "/sessions/nope").status, 404);
  EXPECT_EQ(http_request(port_, "GET", "/sessions/nope/stats").status, 404);
  EXPECT_EQ(http_request(port_, "POST", "/sessions/nope/start").status, 404);
  EXPECT_EQ(http_request(port_, "POST", "/sessions", {{"language", "en"}}).status, 400);
  EXPECT_EQ(
      http_request(port_, "POST", "/sessions", {{"source", "x.wav"}, {"config", {{"tau_active", "1.5"}}}}).status,
      400);
  auto r = http_request(port_, "POST", "/sessions", {{"source", "/no/such.wav"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(http_request(port_, "POST", "/sessions/" + std::string(r.body["session_id"]) + "/start").status, 422);
  EXPECT_EQ(http_request(port_, "GET", "/nowhere").status, 404);
  EXPECT_EQ(http_request(port_, "GET", "/sessions/session-1/events").status, 426);
}

TEST_F(Api, DuplicateCreateGivesTwoSessions) {
  const Json body{{"source", source_fixture("debate_mini.wav")}};
  const auto a = http_request(port_, "POST", "/sessions", body), b = http_request(port_, "POST", "/sessions", body);
  EXPECT_NE(a.body["session_id"], b.body["session_id"]);
}

TEST_F(Api, WebSocketReplayFromOffset) {
  const std::string id = create_and_finish();
  const auto log = manager_.get(id)->log()->events();
  ASSERT_GT(log.size(), 10u);
  WsClient ws(port_, "/sessions/" + id + "/events?from=7");
  std::vector<std::string> got;
  while (auto line = ws.read()) got.push_back(*line);
  ASSERT_EQ(got.size(), log.size() - 7);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], log[7 + i]->line);
  EXPECT_EQ(ws.close_code(), 1000);
}

TEST_F(Api, WebSocketLiveMatchesLog) {
  auto r = http_request(port_, "POST", "/sessions", {{"source", source_fixture("debate_mini.wav")}});
  const std::string id = r.body["session_id"];
  WsClient ws(port_, "/sessions/" + id + "/events");
  http_request(port_, "POST", "/sessions/" + id + "/start");
  std::vector<std::string> got;
  while (auto line = ws.read()) got.push_back(*line);
  const auto log = manager_.get(id)->log()->events();
  ASSERT_EQ(got.size(), log.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], log[i]->line);
}

TEST_F(Api, WebSocketRejectsBadRequests) {
  EXPECT_THROW(WsClient(port_, "/sessions/nope/events"), std::exception);
  const std::string id = create_and_finish();
  EXPECT_THROW(WsClient(port_, "/sessions/" + id + "/events?from=abc"), std::exception);
}

TEST_F(Api, ResumeAfterDisconnect) {
  const std::string id = create_and_finish();
  const auto log = manager_.get(id)->log()->events();
  std::vector<std::string> got;
  {
    WsClient ws(port_, "/sessions/" + id + "/events");
    for (int i = 0; i < 5; ++i) got.push_back(*ws.read());
    ws.kill();
  }
  const auto last = SessionEvent::from_line(got.back()).event_id;
  WsClient again(port_, "/sessions/" + id + "/events?from=" + std::to_string(last));
  while (auto line = again.read()) got.push_back(*line);
  ASSERT_EQ(got.size(), log.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], log[i]->line);
}
