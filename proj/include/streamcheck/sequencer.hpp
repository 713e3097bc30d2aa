#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <mutex>
#include <vector>

#include "streamcheck/events.hpp"

namespace streamcheck {

struct PendingEvent {
  EventKind kind = EventKind::session_status;
  double stream_time = 0.0;
  Json payload = Json::object();
};

// Merges independently produced lanes of events into one order that does
// not depend on thread scheduling. Events are released by the key
// (stream_time, lane_rank, lane_seq) once every other lane either holds a
// larger pending key or has promised (via its watermark or by closing) that
// it will never produce a smaller one.
//
// Per lane: pushed stream_times are non-decreasing and never below the
// lane's watermark.
class Sequencer {
 public:
  using Sink = std::function<void(PendingEvent&&)>;

  // lane i has rank i.
  Sequencer(std::size_t lanes, Sink sink);

  void push(std::size_t lane, PendingEvent event);
  // Future pushes on `lane` have stream_time >= watermark.
  void advance(std::size_t lane, double watermark);
  void close(std::size_t lane);

  bool all_closed() const;
  std::size_t pending() const;

 private:
  struct Lane {
    std::deque<std::pair<std::uint64_t, PendingEvent>> items;
    double watermark = -std::numeric_limits<double>::infinity();
    bool closed = false;
    std::uint64_t next_seq = 0;
  };

  void drain_locked();

  Sink sink_;
  mutable std::mutex mutex_;
  std::vector<Lane> lanes_;
};

}  // namespace streamcheck
