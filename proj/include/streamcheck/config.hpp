#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "streamcheck/claims.hpp"
#include "streamcheck/diarization.hpp"
#include "streamcheck/evidence.hpp"
#include "streamcheck/ingest.hpp"
#include "streamcheck/transcribe.hpp"

namespace streamcheck {

struct AlignmentOptions {
  double min_overlap = 0.3;
  double grace_stream = 1.0;  // wait for timeline coverage of t_end + this
  double grace_wall = 3.0;    // or this much wall time, when paced
};

struct EngineConfig {
  std::string language = "en";
  IngestOptions ingest;
  int hangover_silence = 2;
  double max_utterance = 15.0;
  TranscribeOptions transcribe;
  DiarizationParams diarization;
  AlignmentOptions alignment;
  ClaimOptions claims;
  GatherOptions gather;
  std::string blocklist_path;  // empty: shipped default domains
  double evidence_jaccard = 0.7;
  RankOptions rank;
  double nli_deadline = 2.0;
  double justification_deadline = 5.0;
  std::string prompts_dir;  // empty: compiled-in templates
  // Pace ingest against the wall clock (live operation). Offline runs feed
  // chunks as fast as the pipeline accepts them.
  bool realtime = false;
  double realtime_speed = 1.0;
  std::size_t queue_capacity = 64;
  double stop_grace = 10.0;

  // Throws InvalidConfig describing the first out-of-range value.
  void validate() const;
  std::set<std::string> blocklist() const;
};

// Applies key=value overrides. Unknown keys and malformed values raise
// InvalidConfig; the result is validated.
EngineConfig apply_overrides(EngineConfig base, const std::map<std::string, std::string>& overrides);

// Flat key=value lines; '#' comments and blank lines ignored. The _lines
// form keeps file order and repeated keys.
std::vector<std::pair<std::string, std::string>> parse_key_value_lines(const std::string& content,
                                                                       const std::string& origin = "config");
std::map<std::string, std::string> parse_key_values(const std::string& content, const std::string& origin = "config");
EngineConfig load_config(const std::string& path);

// Every recognised key with its current value, in key order.
std::map<std::string, std::string> describe(const EngineConfig& config);

}  // namespace streamcheck
