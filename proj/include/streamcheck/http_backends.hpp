#pragma once

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "streamcheck/backends.hpp"
#include "streamcheck/mock_backends.hpp"

namespace streamcheck {

// Clients for the backend wire contracts (JSON over HTTP POST). Transport
// timeouts surface as BackendTimeout, other failures as BackendError.
std::shared_ptr<VadBackend> http_vad(const std::string& url, double timeout = 30.0);
std::shared_ptr<AsrBackend> http_asr(const std::string& url, double timeout = 30.0);
std::shared_ptr<SegmentationBackend> http_segmentation(const std::string& url, double timeout = 30.0);
std::shared_ptr<EmbeddingBackend> http_embedding(const std::string& url, double timeout = 30.0);
std::shared_ptr<ClassifierBackend> http_classifier(const std::string& url, double timeout = 30.0);
std::shared_ptr<TextGenBackend> http_textgen(const std::string& url, double timeout = 30.0);
std::shared_ptr<SearchBackend> http_search(const std::string& url, double timeout = 30.0);
std::shared_ptr<RankerBackend> http_ranker(const std::string& url, double timeout = 30.0);
std::shared_ptr<NliBackend> http_nli(const std::string& url, double timeout = 30.0);

// Serves a BackendSet over the wire contracts: POST /vad, /asr,
// /segmentation, /embedding, /classifier, /textgen, /search/<name>,
// /ranker, /nli. Scripted timeouts answer 504, other errors 500.
class BackendServer {
 public:
  explicit BackendServer(BackendSet backends);
  ~BackendServer();

  BackendServer(const BackendServer&) = delete;
  BackendServer& operator=(const BackendServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  bool listen(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }
  std::string base_url() const;
  // "interface=url" lines that point a backend file at this server.
  std::string endpoint_file() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;
};

// Resolves a --backends argument:
//   mock:<fixture>[?option=value&...]  fixture name under fixtures_dir, or a path
//   <file>                             lines "interface=url" or "interface=mock:<fixture>";
//                                      search backends as "search.<name>=url",
//                                      optional "internal_index=<name>"
// Throws InvalidConfig (or SchemaViolation for a bad fixture).
BackendSet resolve_backends(const std::string& spec, const std::string& fixtures_dir);

// Directory holding the shipped fixtures: $STREAMCHECK_FIXTURES or the
// source tree's fixtures/.
std::string default_fixtures_dir();

}  // namespace streamcheck
