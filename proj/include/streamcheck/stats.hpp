#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "streamcheck/diarization.hpp"
#include "streamcheck/events.hpp"

namespace streamcheck {

struct SpeakerStats {
  std::string speaker_id;
  double talk_time_seconds = 0.0;
  std::size_t claims_total = 0;
  std::size_t supported = 0;
  std::size_t disputed = 0;  // verdict label Refuted
  std::size_t unverified = 0;

  bool operator==(const SpeakerStats&) const = default;
};

struct StatsSnapshot {
  std::vector<SpeakerStats> speakers;  // ordered by speaker_id
  std::map<char, std::size_t> topics;  // always holds all of A..H
  double session_clock = 0.0;
  std::size_t verdicts = 0;

  bool operator==(const StatsSnapshot&) const = default;
  Json to_json() const;
  static StatsSnapshot from_json(const Json& j);
};

// Single-writer fold over published events. Timeline payloads extend talk
// time (merged exactly as the diarizer merges), verdict payloads bump the
// per-speaker and per-topic counters. A verdict for a speaker never seen on
// the timeline is counted under UNKNOWN.
class SessionStats {
 public:
  explicit SessionStats(double merge_gap = 0.25);

  void apply(const SessionEvent& event);
  StatsSnapshot snapshot() const;

 private:
  SpeakerTimeline timeline_;
  std::map<std::string, SpeakerStats> claims_;
  std::map<char, std::size_t> topics_;
  double clock_ = 0.0;
  std::size_t verdicts_ = 0;
};

}  // namespace streamcheck
