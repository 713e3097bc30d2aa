#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamcheck/audio.hpp"
#include "streamcheck/backends.hpp"
#include "streamcheck/types.hpp"

namespace streamcheck {

struct DiarizationParams {
  double tau_active = 0.65;
  double delta_new = 0.75;
  double activity_fraction = 0.5;
  double window = 5.0;
  double hop = 0.5;
  double merge_gap = 0.25;
  double backend_deadline = 2.0;
  std::size_t max_local_speakers = 20;

  // Throws InvalidConfig.
  void validate() const;
};

// A local speaker of one buffer that passed the activity test.
struct LocalSpeaker {
  std::size_t local_index = 0;
  std::vector<bool> mask;  // frames with probability > tau_active
};

// Local speaker j is active iff the fraction of frames with prob > tau_active
// is at least activity_fraction.
std::vector<LocalSpeaker> active_speakers(const ActivityMatrix& activity, const DiarizationParams& params);

struct SpeakerEmbedding {
  std::vector<double> vector;  // unit norm
  std::size_t local_index = 0;
};

// Normalizes a backend vector. Throws BackendError on empty, zero or
// non-finite input.
SpeakerEmbedding make_embedding(std::vector<double> raw, std::size_t local_index);

// 1 - <a, b> for unit vectors.
double cosine_distance(const std::vector<double>& a, const std::vector<double>& b);

std::string speaker_label(std::size_t index);

// The centroid matrix. Ids are handed out in creation order and never reused.
class CentroidStore {
 public:
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<double>& centroid(std::size_t i) const { return entries_.at(i).centroid; }
  std::size_t count(std::size_t i) const { return entries_.at(i).count; }
  const std::string& id(std::size_t i) const { return entries_.at(i).id; }

  std::size_t add(const std::vector<double>& unit_embedding);
  // Count-weighted running mean of every embedding assigned so far,
  // renormalized.
  void update(std::size_t index, const std::vector<double>& unit_embedding);

 private:
  struct Entry {
    std::vector<double> sum;
    std::vector<double> centroid;
    std::size_t count = 0;
    std::string id;
  };
  std::vector<Entry> entries_;
};

// Outcome of matching one buffer's local embeddings against the store.
struct AssignmentPlan {
  // Per input embedding: the pre-existing centroid it maps to, if any.
  std::vector<std::optional<std::size_t>> matched;
  // Input positions founding new centroids, in creation order.
  std::vector<std::size_t> founders;
  // Per input embedding: resulting speaker id (founders pre-numbered).
  std::vector<std::string> speaker_ids;
  double matched_cost = 0.0;
};

// Minimum-total-cosine-distance injective mapping of local embeddings onto
// centroids. A local farther than delta_new from every centroid founds a new
// centroid; so does any local left over when locals outnumber centroids.
// Locals are ordered canonically (by embedding value) before solving, which
// makes the result independent of the order of `embeddings`.
AssignmentPlan assign(const std::vector<SpeakerEmbedding>& embeddings, const CentroidStore& store,
                      double delta_new, std::size_t exhaustive_limit = 3);

void update_centroids(CentroidStore& store, const AssignmentPlan& plan,
                      const std::vector<SpeakerEmbedding>& embeddings);

struct SpeakerInterval {
  std::string speaker_id;
  double t_start = 0.0;
  double t_end = 0.0;

  bool operator==(const SpeakerInterval&) const = default;
};

// Per-speaker merged intervals. Intervals of the same speaker closer than
// merge_gap are joined.
class SpeakerTimeline {
 public:
  explicit SpeakerTimeline(double merge_gap = 0.25) : merge_gap_(merge_gap) {}

  void add(const SpeakerInterval& interval);

  // All intervals ordered by (t_start, speaker_id).
  std::vector<SpeakerInterval> intervals() const;
  const std::vector<SpeakerInterval>& intervals_of(const std::string& speaker_id) const;
  std::vector<std::string> speakers() const;
  double talk_time(const std::string& speaker_id) const;
  bool empty() const noexcept { return by_speaker_.empty(); }

 private:
  double merge_gap_;
  std::map<std::string, std::vector<SpeakerInterval>> by_speaker_;
};

// Absolute-time intervals for the newest hop of a window only (the final
// `hop` seconds), clipped to [0, clip_end] and merged within the hop.
std::vector<SpeakerInterval> emit_timeline(const std::vector<LocalSpeaker>& active,
                                           const std::vector<std::string>& speaker_ids,
                                           double frame_duration, double window_start,
                                           const DiarizationParams& params,
                                           double clip_end = 1e300);

// Fixed-length window that advances one hop at a time; starts zero-filled.
class RollingBuffer {
 public:
  RollingBuffer(double window, double hop, int sample_rate = kCanonicalRate);

  // Returns the number of complete hops now available to step().
  void push(const std::vector<float>& samples);
  bool hop_ready() const { return pending_.size() >= hop_samples_; }
  // Consumes one hop and returns the window ending at it.
  AudioWindow advance();
  // Pads the remaining partial hop with zeros; nullopt when nothing is pending.
  std::optional<AudioWindow> advance_partial();
  double window_end() const;

 private:
  int sample_rate_;
  std::size_t window_samples_;
  std::size_t hop_samples_;
  std::deque<float> window_;
  std::vector<float> pending_;
  std::uint64_t hops_done_ = 0;
  std::uint64_t samples_seen_ = 0;
};

struct HopResult {
  double hop_start = 0.0;
  double hop_end = 0.0;
  std::vector<SpeakerInterval> intervals;
  std::vector<std::string> new_speakers;
  bool skipped = false;
  std::string skip_reason;
};

// Every hop: segment the rolling window, keep active local speakers, embed
// them, match against the centroid store and emit the newest hop.
class OnlineDiarizer {
 public:
  OnlineDiarizer(std::shared_ptr<SegmentationBackend> segmentation,
                 std::shared_ptr<EmbeddingBackend> embedding, DiarizationParams params = {});

  std::vector<HopResult> push(const AudioChunk& chunk);
  // Processes the trailing partial hop; intervals are clipped to session_end.
  std::vector<HopResult> finish(double session_end);

  const CentroidStore& store() const noexcept { return store_; }
  const SpeakerTimeline& timeline() const noexcept { return timeline_; }
  // Stream time up to which hops have been processed.
  double covered_until() const noexcept { return covered_until_; }

 private:
  HopResult step(const AudioWindow& window, double clip_end);

  std::shared_ptr<SegmentationBackend> segmentation_;
  std::shared_ptr<EmbeddingBackend> embedding_;
  DiarizationParams params_;
  RollingBuffer buffer_;
  CentroidStore store_;
  SpeakerTimeline timeline_;
  double covered_until_ = 0.0;
};

}  // namespace streamcheck
