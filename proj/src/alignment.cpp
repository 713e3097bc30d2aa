#include "streamcheck/alignment.hpp"

#include <algorithm>

namespace streamcheck {

AttributedSegment attribute(const TranscriptSegment& segment, const SpeakerTimeline& timeline,
                            double min_overlap) {
  AttributedSegment out;
  out.segment = segment;
  out.speaker_id = kUnknownSpeaker;
  const double duration = segment.t_end - segment.t_start;
  if (!(duration > 0.0)) return out;

  // speakers() is sorted by id, and ids are zero-padded creation indices, so
  // iterating in order and keeping strict improvements favours the lower index.
  std::string best;
  double best_overlap = 0.0;
  for (const auto& id : timeline.speakers()) {
    double overlap = 0.0;
    for (const auto& iv : timeline.intervals_of(id)) {
      overlap += std::max(0.0, std::min(iv.t_end, segment.t_end) - std::max(iv.t_start, segment.t_start));
    }
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = id;
    }
  }
  const double fraction = std::min(1.0, best_overlap / duration);
  if (!best.empty() && fraction >= min_overlap) {
    out.speaker_id = best;
    out.overlap_fraction = fraction;
  } else {
    out.overlap_fraction = fraction;
  }
  return out;
}

}  // namespace streamcheck
