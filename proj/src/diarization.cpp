#include "streamcheck/diarization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <spdlog/spdlog.h>

#include "streamcheck/assignment.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/util/async_call.hpp"

namespace streamcheck {

namespace {

double round_us(double t) { return std::round(t * 1e6) / 1e6; }

std::vector<double> normalized(const std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / norm;
  return out;
}

}  // namespace

void DiarizationParams::validate() const {
  if (!(tau_active > 0.0 && tau_active < 1.0)) throw InvalidConfig("tau_active must be in (0,1)");
  if (!(delta_new > 0.0 && delta_new <= 2.0)) throw InvalidConfig("delta_new must be in (0,2]");
  if (!(activity_fraction > 0.0 && activity_fraction <= 1.0)) {
    throw InvalidConfig("activity_fraction must be in (0,1]");
  }
  if (!(hop > 0.0 && window >= hop)) throw InvalidConfig("diarization window must be at least one hop");
  if (merge_gap < 0.0) throw InvalidConfig("merge_gap must be non-negative");
}

std::vector<LocalSpeaker> active_speakers(const ActivityMatrix& activity, const DiarizationParams& params) {
  std::vector<LocalSpeaker> out;
  if (activity.frames == 0) return out;
  for (std::size_t j = 0; j < activity.speakers; ++j) {
    LocalSpeaker sp;
    sp.local_index = j;
    sp.mask.resize(activity.frames);
    std::size_t on = 0;
    for (std::size_t i = 0; i < activity.frames; ++i) {
      sp.mask[i] = activity.at(i, j) > params.tau_active;
      on += sp.mask[i] ? 1 : 0;
    }
    if (static_cast<double>(on) / static_cast<double>(activity.frames) >= params.activity_fraction) {
      out.push_back(std::move(sp));
    }
  }
  return out;
}

SpeakerEmbedding make_embedding(std::vector<double> raw, std::size_t local_index) {
  double norm = 0.0;
  for (double x : raw) {
    if (!std::isfinite(x)) throw BackendError("embedding contains non-finite values");
    norm += x * x;
  }
  if (raw.empty() || norm <= 0.0) throw BackendError("embedding is empty or zero");
  return {normalized(raw), local_index};
}

double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
  return 1.0 - dot;
}

std::string speaker_label(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "SPEAKER_%02zu", index);
  return buf;
}

std::size_t CentroidStore::add(const std::vector<double>& unit_embedding) {
  Entry e;
  e.sum = unit_embedding;
  e.centroid = unit_embedding;
  e.count = 1;
  e.id = speaker_label(entries_.size());
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

void CentroidStore::update(std::size_t index, const std::vector<double>& unit_embedding) {
  auto& e = entries_.at(index);
  for (std::size_t i = 0; i < e.sum.size() && i < unit_embedding.size(); ++i) e.sum[i] += unit_embedding[i];
  ++e.count;
  // normalize(sum) == normalize(sum / count)
  e.centroid = normalized(e.sum);
}

AssignmentPlan assign(const std::vector<SpeakerEmbedding>& embeddings, const CentroidStore& store,
                      double delta_new, std::size_t exhaustive_limit) {
  const std::size_t n = embeddings.size();
  AssignmentPlan plan;
  plan.matched.assign(n, std::nullopt);
  plan.speaker_ids.assign(n, {});

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (embeddings[a].vector != embeddings[b].vector) return embeddings[a].vector < embeddings[b].vector;
    return embeddings[a].local_index < embeddings[b].local_index;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  const std::size_t k = store.size();
  std::vector<std::size_t> remaining;
  std::vector<std::size_t> founders;
  for (std::size_t i : order) {
    bool near_any = false;
    for (std::size_t c = 0; c < k && !near_any; ++c) {
      near_any = cosine_distance(embeddings[i].vector, store.centroid(c)) <= delta_new;
    }
    (near_any ? remaining : founders).push_back(i);
  }

  if (!remaining.empty()) {
    CostMatrix cost(remaining.size(), k);
    for (std::size_t r = 0; r < remaining.size(); ++r)
      for (std::size_t c = 0; c < k; ++c) cost(r, c) = cosine_distance(embeddings[remaining[r]].vector, store.centroid(c));
    const auto solution = solve_min_cost(cost, exhaustive_limit);
    plan.matched_cost = solution.total_cost;
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      if (solution.row_to_col[r]) {
        plan.matched[remaining[r]] = solution.row_to_col[r];
      } else {
        founders.push_back(remaining[r]);
      }
    }
  }

  std::sort(founders.begin(), founders.end(), [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  plan.founders = founders;
  for (std::size_t i = 0; i < n; ++i)
    if (plan.matched[i]) plan.speaker_ids[i] = store.id(*plan.matched[i]);
  for (std::size_t f = 0; f < founders.size(); ++f) plan.speaker_ids[founders[f]] = speaker_label(k + f);
  return plan;
}

void update_centroids(CentroidStore& store, const AssignmentPlan& plan,
                      const std::vector<SpeakerEmbedding>& embeddings) {
  for (std::size_t i = 0; i < embeddings.size(); ++i)
    if (plan.matched[i]) store.update(*plan.matched[i], embeddings[i].vector);
  for (std::size_t i : plan.founders) store.add(embeddings[i].vector);
}

void SpeakerTimeline::add(const SpeakerInterval& interval) {
  if (!(interval.t_end > interval.t_start)) return;
  auto& list = by_speaker_[interval.speaker_id];
  // Find insertion point, then merge with neighbours closer than merge_gap.
  auto it = std::lower_bound(list.begin(), list.end(), interval,
                             [](const SpeakerInterval& a, const SpeakerInterval& b) { return a.t_start < b.t_start; });
  SpeakerInterval merged = interval;
  while (it != list.begin()) {
    auto prev = std::prev(it);
    if (merged.t_start - prev->t_end >= merge_gap_) break;
    merged.t_start = std::min(merged.t_start, prev->t_start);
    merged.t_end = std::max(merged.t_end, prev->t_end);
    it = list.erase(prev);
  }
  while (it != list.end() && it->t_start - merged.t_end < merge_gap_) {
    merged.t_end = std::max(merged.t_end, it->t_end);
    it = list.erase(it);
  }
  list.insert(it, merged);
}

std::vector<SpeakerInterval> SpeakerTimeline::intervals() const {
  std::vector<SpeakerInterval> out;
  for (const auto& [id, list] : by_speaker_) out.insert(out.end(), list.begin(), list.end());
  std::sort(out.begin(), out.end(), [](const SpeakerInterval& a, const SpeakerInterval& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.speaker_id < b.speaker_id;
  });
  return out;
}

const std::vector<SpeakerInterval>& SpeakerTimeline::intervals_of(const std::string& speaker_id) const {
  static const std::vector<SpeakerInterval> kEmpty;
  auto it = by_speaker_.find(speaker_id);
  return it == by_speaker_.end() ? kEmpty : it->second;
}

std::vector<std::string> SpeakerTimeline::speakers() const {
  std::vector<std::string> out;
  for (const auto& [id, list] : by_speaker_) out.push_back(id);
  return out;
}

double SpeakerTimeline::talk_time(const std::string& speaker_id) const {
  double total = 0.0;
  for (const auto& iv : intervals_of(speaker_id)) total += iv.t_end - iv.t_start;
  return total;
}

std::vector<SpeakerInterval> emit_timeline(const std::vector<LocalSpeaker>& active,
                                           const std::vector<std::string>& speaker_ids,
                                           double frame_duration, double window_start,
                                           const DiarizationParams& params, double clip_end) {
  std::vector<SpeakerInterval> out;
  const double hop_end = round_us(window_start + params.window);
  const double hop_start = round_us(hop_end - params.hop);
  const double lo = std::max(hop_start, 0.0);
  const double hi = std::min(hop_end, clip_end);
  if (!(hi > lo) || frame_duration <= 0.0) return out;

  for (std::size_t s = 0; s < active.size(); ++s) {
    const auto& mask = active[s].mask;
    std::vector<SpeakerInterval> runs;
    std::size_t i = 0;
    while (i < mask.size()) {
      if (!mask[i]) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < mask.size() && mask[j + 1]) ++j;
      const double a = std::max(round_us(window_start + static_cast<double>(i) * frame_duration), lo);
      const double b = std::min(round_us(window_start + static_cast<double>(j + 1) * frame_duration), hi);
      if (b > a) {
        if (!runs.empty() && a - runs.back().t_end < params.merge_gap) {
          runs.back().t_end = b;
        } else {
          runs.push_back({speaker_ids[s], a, b});
        }
      }
      i = j + 1;
    }
    out.insert(out.end(), runs.begin(), runs.end());
  }
  std::sort(out.begin(), out.end(), [](const SpeakerInterval& a, const SpeakerInterval& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.speaker_id < b.speaker_id;
  });
  return out;
}

RollingBuffer::RollingBuffer(double window, double hop, int sample_rate)
    : sample_rate_(sample_rate),
      window_samples_(static_cast<std::size_t>(std::llround(window * sample_rate))),
      hop_samples_(static_cast<std::size_t>(std::llround(hop * sample_rate))),
      window_(window_samples_, 0.0f) {}

void RollingBuffer::push(const std::vector<float>& samples) {
  pending_.insert(pending_.end(), samples.begin(), samples.end());
  samples_seen_ += samples.size();
}

AudioWindow RollingBuffer::advance() {
  const auto hop = static_cast<std::ptrdiff_t>(hop_samples_);
  window_.erase(window_.begin(), window_.begin() + hop);
  window_.insert(window_.end(), pending_.begin(), pending_.begin() + hop);
  pending_.erase(pending_.begin(), pending_.begin() + hop);
  ++hops_done_;
  AudioWindow w;
  w.samples.assign(window_.begin(), window_.end());
  w.sample_rate = sample_rate_;
  w.start_time = window_end() - static_cast<double>(window_samples_) / sample_rate_;
  return w;
}

std::optional<AudioWindow> RollingBuffer::advance_partial() {
  if (pending_.empty()) return std::nullopt;
  pending_.resize(hop_samples_, 0.0f);
  return advance();
}

double RollingBuffer::window_end() const {
  return static_cast<double>(hops_done_ * hop_samples_) / sample_rate_;
}

OnlineDiarizer::OnlineDiarizer(std::shared_ptr<SegmentationBackend> segmentation,
                               std::shared_ptr<EmbeddingBackend> embedding, DiarizationParams params)
    : segmentation_(std::move(segmentation)),
      embedding_(std::move(embedding)),
      params_(params),
      buffer_(params.window, params.hop),
      timeline_(params.merge_gap) {
  params_.validate();
}

std::vector<HopResult> OnlineDiarizer::push(const AudioChunk& chunk) {
  std::vector<HopResult> out;
  buffer_.push(chunk.samples);
  while (buffer_.hop_ready()) out.push_back(step(buffer_.advance(), 1e300));
  return out;
}

std::vector<HopResult> OnlineDiarizer::finish(double session_end) {
  std::vector<HopResult> out;
  while (buffer_.hop_ready()) out.push_back(step(buffer_.advance(), session_end));
  if (auto w = buffer_.advance_partial()) out.push_back(step(*w, session_end));
  return out;
}

HopResult OnlineDiarizer::step(const AudioWindow& window, double clip_end) {
  HopResult result;
  result.hop_end = std::min(round_us(window.start_time + params_.window), clip_end);
  result.hop_start = std::max(round_us(window.start_time + params_.window - params_.hop), 0.0);
  covered_until_ = std::max(covered_until_, result.hop_end);

  auto shared_window = std::make_shared<const AudioWindow>(window);
  const auto deadline = std::chrono::duration<double>(params_.backend_deadline);
  ActivityMatrix activity;
  try {
    auto seg = segmentation_;
    activity = call_with_deadline([seg, shared_window] { return seg->segment(*shared_window); }, deadline);
    if (activity.probs.size() != activity.frames * activity.speakers) {
      throw BackendError("activity matrix shape mismatch");
    }
  } catch (const std::exception& e) {
    spdlog::warn("diarization hop ending {:.3f}s skipped: segmentation failed: {}", result.hop_end, e.what());
    result.skipped = true;
    result.skip_reason = e.what();
    return result;
  }
  for (auto& p : activity.probs) p = std::isfinite(p) ? std::clamp(p, 0.0f, 1.0f) : 0.0f;

  auto active = active_speakers(activity, params_);
  if (active.size() > params_.max_local_speakers) active.resize(params_.max_local_speakers);
  if (active.empty()) return result;

  std::vector<AsyncCall<std::vector<double>>> calls;
  calls.reserve(active.size());
  const double fd = activity.frame_duration;
  for (const auto& sp : active) {
    auto emb = embedding_;
    auto mask = std::make_shared<const std::vector<bool>>(sp.mask);
    calls.push_back(AsyncCall<std::vector<double>>::start(
        [emb, shared_window, mask, fd] { return emb->embed(*shared_window, *mask, fd); }));
  }
  const auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(deadline);
  std::vector<SpeakerEmbedding> embeddings;
  try {
    for (std::size_t s = 0; s < active.size(); ++s) {
      embeddings.push_back(make_embedding(calls[s].get_until(until), active[s].local_index));
    }
  } catch (const std::exception& e) {
    spdlog::warn("diarization hop ending {:.3f}s skipped: embedding failed: {}", result.hop_end, e.what());
    result.skipped = true;
    result.skip_reason = e.what();
    return result;
  }

  const auto plan = assign(embeddings, store_, params_.delta_new);
  update_centroids(store_, plan, embeddings);
  for (std::size_t f : plan.founders) result.new_speakers.push_back(plan.speaker_ids[f]);
  result.intervals = emit_timeline(active, plan.speaker_ids, fd, window.start_time, params_, clip_end);
  for (const auto& iv : result.intervals) timeline_.add(iv);
  return result;
}

}  // namespace streamcheck
