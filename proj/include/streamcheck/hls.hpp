#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace streamcheck::hls {

struct MediaSegment {
  std::string uri;  // as written in the playlist
  double duration = 0.0;
};

// Only EXTINF, segment URIs, EXT-X-TARGETDURATION, EXT-X-ENDLIST and (for
// master playlists) EXT-X-STREAM-INF are interpreted; other tags are ignored.
struct Playlist {
  double target_duration = 0.0;
  std::vector<MediaSegment> segments;
  std::vector<std::string> variants;
  bool ended = false;

  bool is_master() const { return !variants.empty(); }
};

// Throws UnsupportedCodec if the text does not start with #EXTM3U.
Playlist parse_m3u8(std::string_view text);

// RFC 3986-style reference resolution, restricted to what playlists use:
// absolute URLs, host-absolute paths and relative paths (with ./ and ../).
std::string resolve_uri(std::string_view base, std::string_view ref);

bool is_hls_content_type(std::string_view content_type);

}  // namespace streamcheck::hls
