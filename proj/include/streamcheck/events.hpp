#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "streamcheck/util/bounded_queue.hpp"

namespace streamcheck {

using Json = nlohmann::json;

enum class EventKind {
  transcript,
  timeline,
  claim_detected,
  evidence_ready,
  verdict,
  stats_snapshot,
  session_status,
  dropped_audio,
};

std::string to_string(EventKind kind);
// Throws SchemaViolation for an unknown name.
EventKind event_kind_from_string(const std::string& name);

struct SessionEvent {
  std::uint64_t event_id = 0;
  std::string session_id;
  double stream_time = 0.0;
  double wall_time = 0.0;
  EventKind kind = EventKind::session_status;
  Json payload = Json::object();

  // One JSON object with fields in declaration order.
  std::string to_line() const;
  // Throws SchemaViolation naming the offending field.
  static SessionEvent from_line(const std::string& line);
};

using EventPtr = std::shared_ptr<const SessionEvent>;

// Serialized once at append time so every reader sees the same bytes.
struct PublishedEvent {
  SessionEvent event;
  std::string line;
};
using PublishedPtr = std::shared_ptr<const PublishedEvent>;

class EventLog;

// A reader positioned after some event id. Replay is served straight from
// the log; live events arrive through a bounded queue and a subscriber that
// lets it overflow is disconnected.
class Subscription {
 public:
  static constexpr std::size_t kQueueCapacity = 1024;

  // Next event in order; nullopt on timeout or once the stream has ended.
  std::optional<PublishedPtr> next(std::chrono::milliseconds timeout);
  // True once nothing more will be delivered.
  bool finished() const;
  bool disconnected() const noexcept { return overflowed_.load(); }
  void cancel();

 private:
  friend class EventLog;
  Subscription(const EventLog* log, std::uint64_t replay_from, std::uint64_t replay_to)
      : log_(log), cursor_(replay_from), replay_to_(replay_to) {}

  const EventLog* log_;
  std::uint64_t cursor_;     // last id delivered from replay
  std::uint64_t replay_to_;  // last id served by replay
  BoundedQueue<PublishedPtr> live_{kQueueCapacity};
  std::atomic<bool> overflowed_{false};
  std::atomic<bool> cancelled_{false};
};

// Append-only, single-writer, multi-reader event record of one session.
class EventLog {
 public:
  // canonical: wall_time is written as 0.
  explicit EventLog(std::string session_id, bool canonical = false);
  ~EventLog();

  // Mirrors every appended line to a JSONL file (truncated first).
  void open_jsonl(const std::string& path);

  PublishedPtr append(EventKind kind, double stream_time, Json payload);
  // Ends every subscription after its pending events.
  void close();

  // Events with id > from_event_id, then live.
  std::shared_ptr<Subscription> subscribe(std::uint64_t from_event_id = 0);
  std::vector<PublishedPtr> events(std::uint64_t from_event_id = 0) const;

  std::uint64_t last_event_id() const;
  bool closed() const;
  const std::string& session_id() const noexcept { return session_id_; }

 private:
  friend class Subscription;
  PublishedPtr at(std::uint64_t event_id) const;

  const std::string session_id_;
  const bool canonical_;
  mutable std::mutex mutex_;
  std::vector<PublishedPtr> events_;
  std::vector<std::weak_ptr<Subscription>> subscribers_;
  std::ofstream jsonl_;
  bool closed_ = false;
};

double wall_clock_now();

}  // namespace streamcheck
