#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace streamcheck {

// A window of canonical audio handed to segmentation/embedding backends.
struct AudioWindow {
  std::vector<float> samples;
  double start_time = 0.0;
  int sample_rate = 16000;
};

// n frames x k local speakers, row-major, each entry in [0,1].
struct ActivityMatrix {
  std::size_t frames = 0;
  std::size_t speakers = 0;
  double frame_duration = 0.0;
  std::vector<float> probs;

  float at(std::size_t frame, std::size_t speaker) const { return probs[frame * speakers + speaker]; }
  float& at(std::size_t frame, std::size_t speaker) { return probs[frame * speakers + speaker]; }
};

struct AsrSpan {
  std::string text;
  double start = 0.0;  // relative to the submitted buffer
  double end = 0.0;
};

struct TranscriptSegment {
  std::string segment_id;
  std::string text;
  double t_start = 0.0;
  double t_end = 0.0;
  std::string language = "en";
  bool is_final = true;
};

struct AttributedSegment {
  TranscriptSegment segment;
  std::string speaker_id;
  double overlap_fraction = 0.0;
};

struct EvidenceDoc {
  std::string url;
  std::string canonical_url;
  std::string title;
  std::string snippet;
  std::string source_backend;
  double retrieved_at = 0.0;  // wall clock, seconds since epoch
};

enum class NliLabel { supported, refuted };

struct NliResult {
  NliLabel label = NliLabel::supported;
  double confidence = 0.0;
};

std::string to_string(NliLabel label);

}  // namespace streamcheck
