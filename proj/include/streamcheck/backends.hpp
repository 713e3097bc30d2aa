#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamcheck/audio.hpp"
#include "streamcheck/types.hpp"

namespace streamcheck {

// Every backend may throw BackendError (or BackendTimeout). Implementations
// must be safe to call from several threads at once.

class VadBackend {
 public:
  virtual ~VadBackend() = default;
  virtual bool is_speech(const AudioChunk& chunk) = 0;
};

struct AsrRequest {
  std::vector<float> samples;
  int sample_rate = kCanonicalRate;
  double stream_start = 0.0;
  std::string language = "en";
};

class AsrBackend {
 public:
  virtual ~AsrBackend() = default;
  // Spans ordered, non-overlapping, relative to the start of the request.
  virtual std::vector<AsrSpan> transcribe(const AsrRequest& request) = 0;
};

class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  virtual ActivityMatrix segment(const AudioWindow& window) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  // Raw (not necessarily normalized) speaker embedding for the frames where
  // mask is true.
  virtual std::vector<double> embed(const AudioWindow& window, const std::vector<bool>& mask,
                                    double frame_duration) = 0;
};

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  // Probability that the text is check-worthy.
  virtual double score(const std::string& text) = 0;
};

struct PromptRequest {
  std::string template_id;
  std::map<std::string, std::string> variables;
  std::string prompt;  // template rendered with variables
};

class TextGenBackend {
 public:
  virtual ~TextGenBackend() = default;
  virtual std::string complete(const PromptRequest& request) = 0;
};

struct SearchQuery {
  std::string query;
  std::string language = "en";
  std::size_t k = 5;
  std::string claim_id;
};

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<EvidenceDoc> search(const SearchQuery& query) = 0;
};

class RankerBackend {
 public:
  virtual ~RankerBackend() = default;
  virtual double score(const std::string& claim_text, const std::string& snippet) = 0;
};

class NliBackend {
 public:
  virtual ~NliBackend() = default;
  virtual NliResult classify(const std::string& claim_text, const std::string& evidence_snippet) = 0;
};

struct NamedSearchBackend {
  std::string name;
  std::shared_ptr<SearchBackend> backend;
};

// Everything one session needs. The search backend whose name equals
// internal_index is the previous-fact-check index.
struct BackendSet {
  std::shared_ptr<VadBackend> vad;
  std::shared_ptr<AsrBackend> asr;
  std::shared_ptr<SegmentationBackend> segmentation;
  std::shared_ptr<EmbeddingBackend> embedding;
  std::shared_ptr<ClassifierBackend> classifier;
  std::shared_ptr<TextGenBackend> textgen;
  std::vector<NamedSearchBackend> search;
  std::shared_ptr<RankerBackend> ranker;
  std::shared_ptr<NliBackend> nli;
  std::string internal_index = "factindex";

  // Throws InvalidConfig naming the first missing interface.
  void validate() const;
};

}  // namespace streamcheck
