#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamcheck/audio.hpp"

namespace streamcheck {

struct IngestOptions {
  double chunk_duration = 0.5;
  // Decode adapter command (program plus optional leading arguments). It is
  // invoked as `<cmd> <input> s16le 16000 1` and must write raw samples to
  // stdout. Empty: only WAV is decoded (natively).
  std::string decode_adapter;
  double min_poll_interval = 1.0;
  int fetch_retries = 2;
  double http_timeout = 10.0;
};

enum class EndReason { none, end_of_file, playlist_ended, cancelled };

// Ordered producer of canonical 16 kHz mono chunks for one session. Not
// thread-safe except for cancel().
class ChunkProducer {
 public:
  virtual ~ChunkProducer() = default;
  // nullopt at the end of the stream; end_reason() then says why. Throws
  // UnreachableSource / UnsupportedCodec on failures mid-stream.
  virtual std::optional<AudioChunk> next() = 0;
  virtual void cancel() = 0;
  virtual EndReason end_reason() const = 0;
};

// Throws UnreachableSource / UnsupportedCodec / InvalidConfig when the
// source cannot be opened.
std::unique_ptr<ChunkProducer> open_stream(const StreamSource& source, const IngestOptions& options);

// Runs the decode adapter on a local input and returns canonical samples.
// Non-zero exit raises UnsupportedCodec.
std::vector<float> run_decode_adapter(const std::string& command, const std::string& input);

// Decodes encoded media bytes to canonical mono samples: native for WAV,
// otherwise through the adapter (via a temporary file).
std::vector<float> decode_media(const std::string& bytes, const std::string& adapter);

}  // namespace streamcheck
