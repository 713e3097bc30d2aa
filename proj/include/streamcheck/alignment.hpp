#pragma once

#include <string>

#include "streamcheck/diarization.hpp"
#include "streamcheck/types.hpp"

namespace streamcheck {

inline constexpr const char* kUnknownSpeaker = "UNKNOWN";

// Binds a segment to the speaker with the largest overlapped duration; ties
// go to the lower speaker index. Below min_overlap the speaker is
// kUnknownSpeaker.
AttributedSegment attribute(const TranscriptSegment& segment, const SpeakerTimeline& timeline,
                            double min_overlap = 0.3);

}  // namespace streamcheck
