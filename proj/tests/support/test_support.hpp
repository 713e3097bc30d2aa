#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "streamcheck/audio.hpp"
#include "streamcheck/backends.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/events.hpp"

namespace streamcheck::testing {

// Function-backed backends so each test scripts exactly the behaviour it needs.
struct FnVad : VadBackend {
  std::function<bool(const AudioChunk&)> fn;
  explicit FnVad(std::function<bool(const AudioChunk&)> f) : fn(std::move(f)) {}
  bool is_speech(const AudioChunk& c) override { return fn(c); }
};
struct FnAsr : AsrBackend {
  std::function<std::vector<AsrSpan>(const AsrRequest&)> fn;
  std::atomic<int> calls{0};
  explicit FnAsr(std::function<std::vector<AsrSpan>(const AsrRequest&)> f) : fn(std::move(f)) {}
  std::vector<AsrSpan> transcribe(const AsrRequest& r) override {
    ++calls;
    return fn(r);
  }
};
struct FnClassifier : ClassifierBackend {
  std::function<double(const std::string&)> fn;
  explicit FnClassifier(std::function<double(const std::string&)> f) : fn(std::move(f)) {}
  double score(const std::string& t) override { return fn(t); }
};
struct FnTextGen : TextGenBackend {
  std::function<std::string(const PromptRequest&)> fn;
  explicit FnTextGen(std::function<std::string(const PromptRequest&)> f) : fn(std::move(f)) {}
  std::string complete(const PromptRequest& r) override { return fn(r); }
};
struct FnSearch : SearchBackend {
  std::function<std::vector<EvidenceDoc>(const SearchQuery&)> fn;
  explicit FnSearch(std::function<std::vector<EvidenceDoc>(const SearchQuery&)> f) : fn(std::move(f)) {}
  std::vector<EvidenceDoc> search(const SearchQuery& q) override { return fn(q); }
};
struct FnRanker : RankerBackend {
  std::function<double(const std::string&, const std::string&)> fn;
  explicit FnRanker(std::function<double(const std::string&, const std::string&)> f) : fn(std::move(f)) {}
  double score(const std::string& c, const std::string& s) override { return fn(c, s); }
};
struct FnNli : NliBackend {
  std::function<NliResult(const std::string&, const std::string&)> fn;
  explicit FnNli(std::function<NliResult(const std::string&, const std::string&)> f) : fn(std::move(f)) {}
  NliResult classify(const std::string& c, const std::string& s) override { return fn(c, s); }
};
struct FnSegmentation : SegmentationBackend {
  std::function<ActivityMatrix(const AudioWindow&)> fn;
  explicit FnSegmentation(std::function<ActivityMatrix(const AudioWindow&)> f) : fn(std::move(f)) {}
  ActivityMatrix segment(const AudioWindow& w) override { return fn(w); }
};
struct FnEmbedding : EmbeddingBackend {
  std::function<std::vector<double>(const AudioWindow&, const std::vector<bool>&, double)> fn;
  explicit FnEmbedding(std::function<std::vector<double>(const AudioWindow&, const std::vector<bool>&, double)> f)
      : fn(std::move(f)) {}
  std::vector<double> embed(const AudioWindow& w, const std::vector<bool>& m, double fd) override {
    return fn(w, m, fd);
  }
};

inline void sleep_ms(int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }

inline std::vector<float> sine(double freq, double seconds, int rate = kCanonicalRate, double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<float>(amplitude * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
  return out;
}

inline AudioChunk chunk_of(std::vector<float> samples, double start, std::uint64_t seq = 0,
                           int rate = kCanonicalRate) {
  AudioChunk c;
  c.duration = static_cast<double>(samples.size()) / rate;
  c.samples = std::move(samples);
  c.sample_rate = rate;
  c.start_time = start;
  c.sequence_no = seq;
  return c;
}

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& content) const;

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::string& path);
std::string source_fixture(const std::string& name);  // path of a shipped fixture file

// HLS origin serving an in-memory playlist and WAV segments. In live mode
// each playlist request reveals one more segment until all are published,
// then the playlist carries EXT-X-ENDLIST.
class HlsFixtureServer {
 public:
  HlsFixtureServer(std::vector<std::vector<float>> segments, double target_duration, bool live = false);
  ~HlsFixtureServer();

  std::string playlist_url() const;
  std::string base_url() const;
  // Request paths in arrival order.
  std::vector<std::string> access_log() const;
  std::size_t count(const std::string& path) const;
  // Replaces every segment body with a non-WAV payload.
  void corrupt_segments();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Synchronous WebSocket reader.
class WsClient {
 public:
  WsClient(int port, const std::string& target);
  ~WsClient();
  // Next text message, nullopt once the server closed the stream.
  std::optional<std::string> read();
  // Drops the TCP connection without a closing handshake.
  void kill();
  // Close code received with the closing frame (0 if none yet).
  int close_code() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Minimal HTTP JSON client for the API tests.
struct HttpResult {
  int status = 0;
  Json body;
};
HttpResult http_request(int port, const std::string& method, const std::string& target, const Json& body = nullptr);

// A one-line fixture override: the shipped debate_mini script with `patch`
// merged over it (RFC 7386 style) written to `dir`.
std::string patched_fixture(const TempDir& dir, const std::string& name, const Json& patch,
                            const std::string& base = "debate_mini");

}  // namespace streamcheck::testing
