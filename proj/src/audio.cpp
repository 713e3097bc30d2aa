#include "streamcheck/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "streamcheck/error.hpp"

namespace streamcheck {

namespace {

constexpr std::array kSupportedRates{8000, 16000, 22050, 44100, 48000};

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}
std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) |
         (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}
void put_u16(std::string& b, std::uint16_t v) {
  b += static_cast<char>(v & 0xFF);
  b += static_cast<char>((v >> 8) & 0xFF);
}
void put_u32(std::string& b, std::uint32_t v) {
  put_u16(b, static_cast<std::uint16_t>(v & 0xFFFF));
  put_u16(b, static_cast<std::uint16_t>(v >> 16));
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

StreamSource StreamSource::from_locator(std::string locator, std::string language) {
  StreamSource src;
  src.locator = std::move(locator);
  src.language = std::move(language);
  std::string_view path = src.locator;
  path = path.substr(0, path.find('?'));
  const bool remote = src.locator.rfind("http://", 0) == 0 || src.locator.rfind("https://", 0) == 0;
  src.kind = (remote || ends_with(path, ".m3u8")) ? SourceKind::hls_playlist : SourceKind::local_file;
  return src;
}

void StreamSource::validate() const {
  if (locator.empty()) throw InvalidConfig("stream source locator is empty");
  if (language.empty()) throw InvalidConfig("stream source language tag is empty");
}

std::string to_string(SourceKind kind) {
  return kind == SourceKind::hls_playlist ? "hls_playlist" : "local_file";
}

bool is_supported_rate(int rate) noexcept {
  return std::find(kSupportedRates.begin(), kSupportedRates.end(), rate) != kSupportedRates.end();
}

std::vector<float> resample_linear(std::span<const float> samples, int from_rate, int to_rate) {
  if (!is_supported_rate(from_rate) || !is_supported_rate(to_rate)) {
    throw UnsupportedRate("unsupported sample rate " + std::to_string(from_rate) + " -> " +
                          std::to_string(to_rate));
  }
  if (from_rate == to_rate) return {samples.begin(), samples.end()};
  const auto n = samples.size();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * to_rate / static_cast<double>(from_rate)));
  std::vector<float> out(out_len);
  if (n == 0) return out;
  const double step = static_cast<double>(from_rate) / to_rate;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double x = static_cast<double>(i) * step;
    const auto left = std::min(static_cast<std::size_t>(x), n - 1);
    const auto right = std::min(left + 1, n - 1);
    const double frac = x - static_cast<double>(left);
    const double v = samples[left] * (1.0 - frac) + samples[right] * frac;
    out[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return out;
}

AudioChunk resample(const AudioChunk& chunk, int target_rate) {
  AudioChunk out;
  out.samples = resample_linear(chunk.samples, chunk.sample_rate, target_rate);
  out.sample_rate = target_rate;
  out.start_time = chunk.start_time;
  out.duration = chunk.duration;
  out.sequence_no = chunk.sequence_no;
  return out;
}

bool looks_like_wav(std::string_view bytes) noexcept {
  return bytes.size() >= 12 && bytes.substr(0, 4) == "RIFF" && bytes.substr(8, 4) == "WAVE";
}

PcmAudio decode_wav(std::string_view bytes) {
  if (!looks_like_wav(bytes)) throw UnsupportedCodec("not a RIFF/WAVE stream");
  std::size_t pos = 12;
  int channels = 0, rate = 0, bits = 0, format = 0;
  std::string_view data;
  bool have_fmt = false, have_data = false;
  while (pos + 8 <= bytes.size()) {
    const auto id = bytes.substr(pos, 4);
    std::size_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    size = std::min(size, bytes.size() - body);
    if (id == "fmt ") {
      if (size < 16) throw UnsupportedCodec("truncated fmt chunk");
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = static_cast<int>(read_u32(bytes, body + 4));
      bits = read_u16(bytes, body + 14);
      if (format == 0xFFFE && size >= 26) format = read_u16(bytes, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.substr(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw UnsupportedCodec("WAV stream lacks fmt or data chunk");
  if (format != 1 || bits != 16 || channels < 1) {
    throw UnsupportedCodec("only 16-bit PCM WAV is decoded natively");
  }
  const std::size_t frames = data.size() / (2 * static_cast<std::size_t>(channels));
  PcmAudio pcm;
  pcm.sample_rate = rate;
  pcm.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const auto v = static_cast<std::int16_t>(read_u16(data, (f * channels + c) * 2));
      acc += v / 32768.0;
    }
    pcm.samples[f] = static_cast<float>(acc / channels);
  }
  return pcm;
}

std::string encode_wav(std::span<const float> samples, int sample_rate) {
  const std::string pcm = float_to_s16le(samples);
  std::string out;
  out.reserve(44 + pcm.size());
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + pcm.size()));
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * 2));
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(pcm.size()));
  out += pcm;
  return out;
}

PcmAudio read_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreachableSource("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

void write_wav_file(const std::string& path, std::span<const float> samples, int sample_rate) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const auto bytes = encode_wav(samples, sample_rate);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> s16le_to_float(std::string_view bytes) {
  std::vector<float> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(read_u16(bytes, 2 * i)) / 32768.0f;
  }
  return out;
}

std::string float_to_s16le(std::span<const float> samples) {
  std::string out;
  out.reserve(samples.size() * 2);
  for (float s : samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(clamped * 32768.0, -32768.0, 32767.0)));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

ChunkSlicer::ChunkSlicer(double chunk_duration, int sample_rate)
    : sample_rate_(sample_rate),
      chunk_samples_(static_cast<std::size_t>(std::llround(chunk_duration * sample_rate))) {
  if (chunk_samples_ == 0) throw InvalidConfig("chunk duration rounds to zero samples");
}

AudioChunk ChunkSlicer::make_chunk(std::vector<float> samples) {
  AudioChunk chunk;
  chunk.sample_rate = sample_rate_;
  chunk.start_time = static_cast<double>(samples_emitted_) / sample_rate_;
  chunk.duration = static_cast<double>(samples.size()) / sample_rate_;
  chunk.sequence_no = next_seq_++;
  samples_emitted_ += samples.size();
  for (auto& s : samples) s = std::clamp(s, -1.0f, 1.0f);
  chunk.samples = std::move(samples);
  return chunk;
}

void ChunkSlicer::push(std::span<const float> samples, std::vector<AudioChunk>& out) {
  pending_.insert(pending_.end(), samples.begin(), samples.end());
  std::size_t offset = 0;
  while (pending_.size() - offset >= chunk_samples_) {
    const auto first = pending_.begin() + static_cast<std::ptrdiff_t>(offset);
    out.push_back(make_chunk(std::vector<float>(first, first + static_cast<std::ptrdiff_t>(chunk_samples_))));
    offset += chunk_samples_;
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(offset));
}

void ChunkSlicer::finish(std::vector<AudioChunk>& out) {
  if (pending_.empty()) return;
  out.push_back(make_chunk(std::move(pending_)));
  pending_.clear();
}

}  // namespace streamcheck
