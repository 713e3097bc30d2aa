#include "streamcheck/ingest.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "streamcheck/error.hpp"
#include "streamcheck/hls.hpp"
#include "streamcheck/http_util.hpp"

extern char** environ;

namespace streamcheck {

namespace {

std::vector<std::string> split_command(const std::string& command) {
  std::istringstream in(command);
  std::vector<std::string> argv;
  std::string tok;
  while (in >> tok) argv.push_back(tok);
  return argv;
}

std::vector<float> to_canonical(const PcmAudio& pcm) {
  if (pcm.sample_rate == kCanonicalRate) return pcm.samples;
  return resample_linear(pcm.samples, pcm.sample_rate, kCanonicalRate);
}

class TempFile {
 public:
  explicit TempFile(const std::string& bytes) {
    std::string tmpl = (std::filesystem::temp_directory_path() / "streamcheck-seg-XXXXXX").string();
    const int fd = ::mkstemp(tmpl.data());
    if (fd < 0) throw Error("cannot create temporary file");
    path_ = tmpl;
    std::size_t off = 0;
    while (off < bytes.size()) {
      const auto n = ::write(fd, bytes.data() + off, bytes.size() - off);
      if (n <= 0) {
        ::close(fd);
        throw Error("cannot write temporary file");
      }
      off += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempFile() { std::filesystem::remove(path_); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class LocalFileProducer final : public ChunkProducer {
 public:
  LocalFileProducer(const StreamSource& source, const IngestOptions& options) {
    std::ifstream in(source.locator, std::ios::binary);
    if (!in) throw UnreachableSource("cannot open " + source.locator);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<float> samples;
    if (looks_like_wav(bytes) && options.decode_adapter.empty()) {
      samples = to_canonical(decode_wav(bytes));
    } else if (looks_like_wav(bytes)) {
      try {
        samples = to_canonical(decode_wav(bytes));
      } catch (const UnsupportedCodec&) {
        samples = run_decode_adapter(options.decode_adapter, source.locator);
      }
    } else {
      if (options.decode_adapter.empty()) {
        throw UnsupportedCodec(source.locator + " is not a WAV file and no decode adapter is configured");
      }
      samples = run_decode_adapter(options.decode_adapter, source.locator);
    }
    ChunkSlicer slicer(options.chunk_duration);
    std::vector<AudioChunk> chunks;
    slicer.push(samples, chunks);
    slicer.finish(chunks);
    chunks_.assign(std::make_move_iterator(chunks.begin()), std::make_move_iterator(chunks.end()));
  }

  std::optional<AudioChunk> next() override {
    if (cancelled_) {
      reason_ = EndReason::cancelled;
      return std::nullopt;
    }
    if (chunks_.empty()) {
      reason_ = EndReason::end_of_file;
      return std::nullopt;
    }
    AudioChunk c = std::move(chunks_.front());
    chunks_.pop_front();
    return c;
  }

  void cancel() override { cancelled_ = true; }
  EndReason end_reason() const override { return reason_; }

 private:
  std::deque<AudioChunk> chunks_;
  std::atomic<bool> cancelled_{false};
  EndReason reason_ = EndReason::none;
};

class HlsProducer final : public ChunkProducer {
 public:
  HlsProducer(const StreamSource& source, IngestOptions options)
      : options_(std::move(options)), slicer_(options_.chunk_duration), playlist_uri_(source.locator) {
    auto pl = fetch_playlist(playlist_uri_);
    if (pl.is_master()) {
      // Adaptive variants are not selected between: the first one wins.
      playlist_uri_ = hls::resolve_uri(playlist_uri_, pl.variants.front());
      pl = fetch_playlist(playlist_uri_);
    }
    absorb(pl);
  }

  std::optional<AudioChunk> next() override {
    while (ready_.empty()) {
      if (cancelled_) {
        reason_ = EndReason::cancelled;
        return std::nullopt;
      }
      if (!todo_.empty()) {
        const auto uri = todo_.front();
        todo_.pop_front();
        const auto samples = decode_media(fetch_segment(uri), options_.decode_adapter);
        std::vector<AudioChunk> out;
        slicer_.push(samples, out);
        for (auto& c : out) ready_.push_back(std::move(c));
        continue;
      }
      if (ended_) {
        if (!finished_) {
          std::vector<AudioChunk> out;
          slicer_.finish(out);
          for (auto& c : out) ready_.push_back(std::move(c));
          finished_ = true;
          continue;
        }
        reason_ = EndReason::playlist_ended;
        return std::nullopt;
      }
      wait_poll_interval();
      if (cancelled_) continue;
      absorb(fetch_playlist(playlist_uri_));
    }
    AudioChunk c = std::move(ready_.front());
    ready_.pop_front();
    return c;
  }

  void cancel() override {
    {
      std::lock_guard lock(mutex_);
      cancelled_ = true;
    }
    wake_.notify_all();
  }

  EndReason end_reason() const override { return reason_; }

 private:
  hls::Playlist fetch_playlist(const std::string& uri) {
    std::string body, content_type;
    if (uri.find("://") == std::string::npos) {
      std::ifstream in(uri, std::ios::binary);
      if (!in) throw UnreachableSource("cannot open playlist " + uri);
      body.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      auto res = http::get(uri, options_.http_timeout);
      if (res.status != 200) {
        throw UnreachableSource("playlist " + uri + " returned HTTP " + std::to_string(res.status));
      }
      body = std::move(res.body);
      content_type = std::move(res.content_type);
      if (body.rfind("#EXTM3U", 0) != 0 && !hls::is_hls_content_type(content_type)) {
        throw UnsupportedCodec(uri + " is not an HLS playlist");
      }
    }
    return hls::parse_m3u8(body);
  }

  void absorb(const hls::Playlist& pl) {
    target_duration_ = pl.target_duration;
    for (const auto& seg : pl.segments) {
      auto abs = hls::resolve_uri(playlist_uri_, seg.uri);
      // Segments reappear in every refresh of a live playlist; each is
      // fetched once.
      if (seen_.insert(abs).second) todo_.push_back(std::move(abs));
    }
    ended_ = pl.ended;
  }

  std::string fetch_segment(const std::string& uri) {
    if (uri.find("://") == std::string::npos) {
      std::ifstream in(uri, std::ios::binary);
      if (!in) throw UnreachableSource("cannot open segment " + uri);
      return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    // Transport failures and 5xx are retried; a 4xx answer is final.
    for (int attempt = 0;; ++attempt) {
      http::Response res;
      try {
        res = http::get(uri, options_.http_timeout);
      } catch (const UnreachableSource&) {
        if (attempt >= options_.fetch_retries) throw;
      }
      if (res.status == 200) return std::move(res.body);
      if (res.status != 0 && (res.status < 500 || attempt >= options_.fetch_retries)) {
        throw UnreachableSource("segment " + uri + " returned HTTP " + std::to_string(res.status));
      }
      spdlog::warn("retrying segment {} (attempt {})", uri, attempt + 2);
      std::this_thread::sleep_for(std::chrono::milliseconds(250 * (attempt + 1)));
    }
  }

  void wait_poll_interval() {
    const double interval = std::max(options_.min_poll_interval, target_duration_ / 2.0);
    std::unique_lock lock(mutex_);
    wake_.wait_for(lock, std::chrono::duration<double>(interval), [&] { return cancelled_.load(); });
  }

  IngestOptions options_;
  ChunkSlicer slicer_;
  std::string playlist_uri_;
  std::set<std::string> seen_;
  std::deque<std::string> todo_;
  std::deque<AudioChunk> ready_;
  double target_duration_ = 0.0;
  bool ended_ = false;
  bool finished_ = false;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::atomic<bool> cancelled_{false};
  EndReason reason_ = EndReason::none;
};

}  // namespace

std::vector<float> run_decode_adapter(const std::string& command, const std::string& input) {
  auto args = split_command(command);
  if (args.empty()) throw UnsupportedCodec("no decode adapter configured");
  for (const char* a : {"s16le", "16000", "1"}) args.emplace_back(a);
  args.insert(args.end() - 3, input);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  int out_pipe[2];
  if (::pipe(out_pipe) != 0) throw Error("pipe() failed");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[1]);
  pid_t pid = 0;
  const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(out_pipe[0]);
    throw UnsupportedCodec("cannot start decode adapter '" + args[0] + "'");
  }
  std::string raw;
  char buf[1 << 15];
  for (;;) {
    const auto n = ::read(out_pipe[0], buf, sizeof buf);
    if (n <= 0) break;
    raw.append(buf, static_cast<std::size_t>(n));
  }
  ::close(out_pipe[0]);
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw UnsupportedCodec("decode adapter rejected " + input);
  }
  return s16le_to_float(raw);
}

std::vector<float> decode_media(const std::string& bytes, const std::string& adapter) {
  if (adapter.empty()) {
    if (!looks_like_wav(bytes)) throw UnsupportedCodec("segment is not WAV and no decode adapter is configured");
    return to_canonical(decode_wav(bytes));
  }
  TempFile tmp(bytes);
  return run_decode_adapter(adapter, tmp.path());
}

std::unique_ptr<ChunkProducer> open_stream(const StreamSource& source, const IngestOptions& options) {
  source.validate();
  if (options.chunk_duration < 0.1 || options.chunk_duration > 2.0) {
    throw InvalidConfig("chunk_duration must be within [0.1, 2.0] seconds");
  }
  if (source.kind == SourceKind::hls_playlist) return std::make_unique<HlsProducer>(source, options);
  return std::make_unique<LocalFileProducer>(source, options);
}

}  // namespace streamcheck
