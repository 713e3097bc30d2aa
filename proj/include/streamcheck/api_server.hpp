#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "streamcheck/session.hpp"

namespace streamcheck {

// HTTP control plane and WebSocket event feed over a SessionManager.
//   POST /sessions                 {"source", "language"?, "config"?: {key: value}, "backends"?}
//   POST /sessions/{id}/start
//   POST /sessions/{id}/stop       blocks until the drain finishes
//   GET  /sessions                 list
//   GET  /sessions/{id}            one session
//   GET  /sessions/{id}/stats      latest stats snapshot
//   GET  /sessions/{id}/events?from={event_id}   WebSocket, one event line per text message
// Errors answer {"error", "message"} with 400 InvalidConfig, 404 UnknownSession,
// 409 IllegalTransition, 422 source failures.
class ApiServer {
 public:
  explicit ApiServer(SessionManager& manager);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds (port 0 picks a free one) and accepts on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace streamcheck
