#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamcheck {

inline constexpr int kCanonicalRate = 16000;

enum class SourceKind { hls_playlist, local_file };

struct StreamSource {
  SourceKind kind = SourceKind::local_file;
  std::string locator;
  std::string language = "en";

  // http(s) URLs and *.m3u8 paths are HLS, everything else a local file.
  static StreamSource from_locator(std::string locator, std::string language = "en");

  // Throws InvalidConfig on an empty locator.
  void validate() const;
};

std::string to_string(SourceKind kind);

// Fixed-rate mono window. Chunk k+1 starts exactly where chunk k ends.
struct AudioChunk {
  std::vector<float> samples;
  int sample_rate = kCanonicalRate;
  double start_time = 0.0;
  double duration = 0.0;
  std::uint64_t sequence_no = 0;

  double end_time() const { return start_time + duration; }
};

bool is_supported_rate(int rate) noexcept;

// Linear-interpolation resampler; output length is round(n * to / from).
// Throws UnsupportedRate unless both rates are in {8000,16000,22050,44100,48000}.
std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate);
AudioChunk resample(const AudioChunk& chunk, int target_rate);

// Mono PCM with its native rate.
struct PcmAudio {
  std::vector<float> samples;
  int sample_rate = kCanonicalRate;
};

// 16-bit PCM RIFF/WAVE; multi-channel input is averaged down to mono.
// Throws UnsupportedCodec for anything else.
PcmAudio decode_wav(std::string_view bytes);
bool looks_like_wav(std::string_view bytes) noexcept;
std::string encode_wav(std::span<const float> samples, int sample_rate);

PcmAudio read_wav_file(const std::string& path);
void write_wav_file(const std::string& path, std::span<const float> samples, int sample_rate);

std::vector<float> s16le_to_float(std::string_view bytes);
std::string float_to_s16le(std::span<const float> samples);

// Re-slices an arbitrary run of canonical samples into chunk_duration windows.
// Times are derived from the sample count, so chunks are gapless by
// construction.
class ChunkSlicer {
 public:
  explicit ChunkSlicer(double chunk_duration, int sample_rate = kCanonicalRate);

  void push(std::span<const float> samples, std::vector<AudioChunk>& out);
  // Emits the remainder (shorter than a full chunk), if any.
  void finish(std::vector<AudioChunk>& out);

  std::size_t chunk_samples() const noexcept { return chunk_samples_; }

 private:
  AudioChunk make_chunk(std::vector<float> samples);

  int sample_rate_;
  std::size_t chunk_samples_;
  std::vector<float> pending_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t samples_emitted_ = 0;
};

}  // namespace streamcheck
