#include "streamcheck/hls.hpp"

#include <sstream>
#include <vector>

#include "streamcheck/error.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck::hls {

namespace {

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string normalize_path(std::string_view path) {
  std::vector<std::string> parts;
  std::string cur;
  std::stringstream ss{std::string(path)};
  while (std::getline(ss, cur, '/')) {
    if (cur.empty() || cur == ".") continue;
    if (cur == "..") {
      if (!parts.empty()) parts.pop_back();
      continue;
    }
    parts.push_back(cur);
  }
  std::string out;
  for (const auto& p : parts) out += "/" + p;
  if (out.empty() || (!path.empty() && path.back() == '/')) out += "/";
  return out;
}

}  // namespace

Playlist parse_m3u8(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Playlist pl;
  bool first = true;
  double pending_duration = -1.0;
  bool pending_variant = false;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (first) {
      if (!line.empty() && line.front() == '\xEF') line = line.substr(3);  // UTF-8 BOM
      if (line != "#EXTM3U") throw UnsupportedCodec("playlist does not start with #EXTM3U");
      first = false;
      continue;
    }
    if (line.empty()) continue;
    if (starts_with(line, "#EXTINF:")) {
      pending_duration = std::stod(line.substr(8));
    } else if (starts_with(line, "#EXT-X-TARGETDURATION:")) {
      pl.target_duration = std::stod(line.substr(22));
    } else if (line == "#EXT-X-ENDLIST") {
      pl.ended = true;
    } else if (starts_with(line, "#EXT-X-STREAM-INF")) {
      pending_variant = true;
    } else if (line[0] == '#') {
      continue;
    } else if (pending_variant) {
      pl.variants.push_back(line);
      pending_variant = false;
    } else {
      pl.segments.push_back({line, pending_duration < 0 ? 0.0 : pending_duration});
      pending_duration = -1.0;
    }
  }
  if (first) throw UnsupportedCodec("empty playlist");
  return pl;
}

std::string resolve_uri(std::string_view base, std::string_view ref) {
  if (ref.find("://") != std::string_view::npos) return std::string(ref);
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string_view::npos) {
    // Local playlist: resolve against its directory.
    if (!ref.empty() && ref[0] == '/') return std::string(ref);
    const auto slash = base.rfind('/');
    const std::string dir = slash == std::string_view::npos ? "" : std::string(base.substr(0, slash + 1));
    return dir + std::string(ref);
  }
  const auto path_start = base.find('/', scheme_end + 3);
  const std::string origin(base.substr(0, path_start));
  std::string base_path = path_start == std::string_view::npos ? "/" : std::string(base.substr(path_start));
  base_path = base_path.substr(0, base_path.find('?'));
  std::string ref_path(ref), query;
  if (const auto q = ref_path.find('?'); q != std::string::npos) {
    query = ref_path.substr(q);
    ref_path.resize(q);
  }
  std::string merged;
  if (!ref_path.empty() && ref_path[0] == '/') {
    merged = ref_path;
  } else {
    merged = base_path.substr(0, base_path.rfind('/') + 1) + ref_path;
  }
  return origin + normalize_path(merged) + query;
}

bool is_hls_content_type(std::string_view content_type) {
  const auto ct = text::to_lower_ascii(content_type);
  return ct.find("mpegurl") != std::string::npos;
}

}  // namespace streamcheck::hls
