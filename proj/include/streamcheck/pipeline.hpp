#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "streamcheck/backends.hpp"
#include "streamcheck/config.hpp"
#include "streamcheck/events.hpp"
#include "streamcheck/ingest.hpp"
#include "streamcheck/prompts.hpp"
#include "streamcheck/sequencer.hpp"
#include "streamcheck/stats.hpp"

namespace streamcheck {

// Sequencer lanes; the index is also the tie-break rank between kinds at
// equal stream time.
enum Lane : std::size_t { kTimelineLane = 0, kTranscriptLane = 1, kClaimLane = 2, kDroppedLane = 3, kLaneCount = 4 };

struct PipelineMetrics {
  std::size_t chunks = 0;
  std::size_t segments = 0;
  std::size_t dropped_utterances = 0;
  std::size_t sentences = 0;
  std::size_t classifier_errors = 0;
  std::size_t suppressed_duplicates = 0;
  std::size_t claims = 0;
  std::size_t claims_all_backends_failed = 0;
  double stream_duration = 0.0;
  // Wall seconds from segment finalization to the claim's verdict event.
  std::vector<double> claim_latencies;
};

enum class PipelineOutcome { running, finished, stopped, failed };

// One session's task group: ingest, transcription and diarization run in
// parallel, then alignment, then the claim stages. Every stage publishes
// through the sequencer so the event log is a pure function of the input
// and the (scripted) backend answers.
class Pipeline {
 public:
  Pipeline(EngineConfig config, BackendSet backends, std::shared_ptr<EventLog> log, bool canonical = false);
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  // Takes ownership of an opened producer and launches the stages.
  void start(std::unique_ptr<ChunkProducer> producer);
  // Ends ingest; everything already read is still processed.
  void request_stop();
  // Makes the remaining stages skip outstanding work.
  void abort();
  // True once all stages have finished.
  bool wait_for(std::chrono::duration<double> timeout);
  void join();

  PipelineOutcome outcome() const;
  std::string failure_reason() const;
  EndReason end_reason() const;
  PipelineMetrics metrics() const;
  StatsSnapshot stats() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace streamcheck
