#include "streamcheck/transcribe.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "streamcheck/error.hpp"
#include "streamcheck/util/async_call.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck {

bool EnergyVad::is_speech(const AudioChunk& chunk) {
  if (chunk.samples.empty()) return false;
  double acc = 0.0;
  for (float s : chunk.samples) acc += std::fabs(s);
  return acc / static_cast<double>(chunk.samples.size()) > threshold_;
}

Gate gate(const AudioChunk& chunk, VadBackend& vad) {
  try {
    return vad.is_speech(chunk) ? Gate::speech : Gate::silence;
  } catch (const std::exception& e) {
    spdlog::warn("VAD failed on chunk {} ({}); treating as speech", chunk.sequence_no, e.what());
    return Gate::speech;
  }
}

std::optional<Utterance> UtteranceGate::feed(const AudioChunk& chunk, Gate g) {
  if (g == Gate::silence) {
    if (!open_) return std::nullopt;
    if (static_cast<int>(pending_silence_.size()) < hangover_) {
      pending_silence_.push_back(chunk);
      return std::nullopt;
    }
    return take();
  }
  if (!open_) {
    open_.emplace();
    open_->start_time = chunk.start_time;
    open_->sample_rate = chunk.sample_rate;
    open_->first_sequence_no = chunk.sequence_no;
  }
  // Interior pauses stay in the buffer so it remains time-contiguous.
  for (const auto& s : pending_silence_) {
    open_->samples.insert(open_->samples.end(), s.samples.begin(), s.samples.end());
  }
  pending_silence_.clear();
  open_->samples.insert(open_->samples.end(), chunk.samples.begin(), chunk.samples.end());
  open_->last_sequence_no = chunk.sequence_no;
  if (open_->duration() >= max_duration_ - 1e-9) return take();
  return std::nullopt;
}

std::optional<Utterance> UtteranceGate::flush() { return take(); }

std::optional<double> UtteranceGate::open_start() const {
  if (!open_) return std::nullopt;
  return open_->start_time;
}

std::optional<Utterance> UtteranceGate::take() {
  pending_silence_.clear();
  std::optional<Utterance> out;
  out.swap(open_);
  return out;
}

double asr_deadline(double buffer_duration, const TranscribeOptions& options) {
  return std::max(options.min_deadline, options.deadline_fraction * buffer_duration);
}

UtteranceTranscript transcribe_utterance(const Utterance& utterance,
                                         const std::shared_ptr<AsrBackend>& backend,
                                         const TranscribeOptions& options) {
  UtteranceTranscript out;
  out.start_time = utterance.start_time;
  out.end_time = utterance.end_time();
  const double duration = utterance.duration();
  if (duration < options.min_buffer) return out;

  auto request = std::make_shared<AsrRequest>();
  request->samples = utterance.samples;
  request->sample_rate = utterance.sample_rate;
  request->stream_start = utterance.start_time;
  request->language = options.language;

  std::vector<AsrSpan> spans;
  for (int attempt = 1;; ++attempt) {
    try {
      spans = call_with_deadline([backend, request] { return backend->transcribe(*request); },
                                 std::chrono::duration<double>(asr_deadline(duration, options)));
      break;
    } catch (const std::exception& e) {
      if (attempt >= options.max_attempts) {
        spdlog::warn("dropping utterance at {:.3f}s after {} attempts: {}", utterance.start_time, attempt, e.what());
        out.dropped = true;
        out.drop_reason = dynamic_cast<const BackendTimeout*>(&e) ? "timeout" : "backend_error";
        return out;
      }
    }
  }

  double last_end = 0.0;
  for (const auto& span : spans) {
    const double start = std::max(span.start, last_end);
    const double end = std::min(span.end, duration);
    auto text = text::trim(span.text);
    if (text.empty() || !(end > start)) continue;
    TranscriptSegment seg;
    seg.text = std::move(text);
    seg.t_start = utterance.start_time + start;
    seg.t_end = utterance.start_time + end;
    seg.language = options.language;
    seg.is_final = true;
    out.segments.push_back(std::move(seg));
    last_end = end;
  }
  return out;
}

}  // namespace streamcheck
