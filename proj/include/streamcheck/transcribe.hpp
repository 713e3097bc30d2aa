#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "streamcheck/audio.hpp"
#include "streamcheck/backends.hpp"

namespace streamcheck {

// Mean absolute amplitude gate.
class EnergyVad final : public VadBackend {
 public:
  explicit EnergyVad(double threshold = 1e-4) : threshold_(threshold) {}
  bool is_speech(const AudioChunk& chunk) override;

 private:
  double threshold_;
};

enum class Gate { speech, silence };

// Fail-open: a VAD error counts as speech so content is never dropped.
Gate gate(const AudioChunk& chunk, VadBackend& vad);

struct Utterance {
  std::vector<float> samples;
  double start_time = 0.0;
  int sample_rate = kCanonicalRate;
  std::uint64_t first_sequence_no = 0;
  std::uint64_t last_sequence_no = 0;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  double end_time() const { return start_time + duration(); }
};

// Speech/silence automaton that groups chunks into utterance buffers.
// Up to `hangover_silence` consecutive silence chunks are tolerated inside an
// utterance; the next silence chunk closes it. Silence never opens an
// utterance and trailing silence is not kept. Buffers reaching
// `max_duration` are force-flushed.
class UtteranceGate {
 public:
  explicit UtteranceGate(int hangover_silence = 2, double max_duration = 15.0)
      : hangover_(hangover_silence), max_duration_(max_duration) {}

  std::optional<Utterance> feed(const AudioChunk& chunk, Gate g);
  std::optional<Utterance> flush();

  // Start time of the open utterance, if any.
  std::optional<double> open_start() const;

 private:
  std::optional<Utterance> take();

  int hangover_;
  double max_duration_;
  std::optional<Utterance> open_;
  std::vector<AudioChunk> pending_silence_;
};

struct TranscribeOptions {
  std::string language = "en";
  double min_buffer = 0.2;
  double deadline_fraction = 0.8;
  double min_deadline = 2.0;
  int max_attempts = 2;  // first try plus one re-queue
};

struct UtteranceTranscript {
  double start_time = 0.0;
  double end_time = 0.0;
  std::vector<TranscriptSegment> segments;  // segment_id left empty
  bool dropped = false;
  std::string drop_reason;
};

double asr_deadline(double buffer_duration, const TranscribeOptions& options);

// Calls the backend with a deadline and converts relative spans into final
// stream-time segments. Timeouts and backend errors are retried once; a
// second failure marks the utterance dropped.
UtteranceTranscript transcribe_utterance(const Utterance& utterance,
                                         const std::shared_ptr<AsrBackend>& backend,
                                         const TranscribeOptions& options);

}  // namespace streamcheck
