#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "streamcheck/audio.hpp"
#include "streamcheck/backends.hpp"
#include "streamcheck/config.hpp"
#include "streamcheck/events.hpp"
#include "streamcheck/pipeline.hpp"

namespace streamcheck {

enum class SessionState { created, running, stopped, finished, failed };

std::string to_string(SessionState state);

struct SessionOptions {
  bool canonical = false;
  std::string jsonl_path;  // empty: in-memory log only
};

// Lifecycle: created -> running -> {stopped, finished, failed}. The config
// is frozen at construction.
class Session {
 public:
  // Throws InvalidConfig for a bad config or an incomplete backend set.
  Session(std::string session_id, StreamSource source, EngineConfig config, BackendSet backends,
          SessionOptions options = {});
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Opens the source and launches the pipeline. A source that cannot be
  // opened moves the session to failed and rethrows.
  SessionState start();
  // Ends ingest and drains in-flight work for up to stop_grace seconds.
  SessionState stop();
  // Blocks until the session leaves the running state.
  SessionState wait();

  SessionState state() const;
  const std::string& id() const noexcept { return id_; }
  const StreamSource& source() const noexcept { return source_; }
  const EngineConfig& config() const noexcept { return config_; }
  std::shared_ptr<EventLog> log() const noexcept { return log_; }
  StatsSnapshot stats() const;
  PipelineMetrics metrics() const;
  std::string failure_reason() const;
  Json describe() const;

 private:
  void monitor();
  void finalize(SessionState state, const std::string& reason);

  const std::string id_;
  const StreamSource source_;
  const EngineConfig config_;
  std::shared_ptr<EventLog> log_;
  std::unique_ptr<Pipeline> pipeline_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  SessionState state_ = SessionState::created;
  bool stop_requested_ = false;
  std::string failure_;
  double final_clock_ = 0.0;  // stream time of the closing status event
  std::thread monitor_;
};

// Registry of independent sessions; creating twice on one source yields two
// sessions.
class SessionManager {
 public:
  using BackendFactory = std::function<BackendSet(const std::string& spec)>;

  SessionManager(BackendFactory factory, std::string default_backends, std::string log_dir = "");

  // Throws InvalidConfig.
  std::shared_ptr<Session> create(const StreamSource& source, const std::map<std::string, std::string>& overrides,
                                  const std::string& backends_spec = "");
  // Throws UnknownSession.
  std::shared_ptr<Session> get(const std::string& session_id) const;
  std::vector<std::shared_ptr<Session>> list() const;

 private:
  BackendFactory factory_;
  std::string default_backends_;
  std::string log_dir_;
  mutable std::mutex mutex_;
  std::size_t next_id_ = 1;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace streamcheck
