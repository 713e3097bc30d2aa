#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streamcheck/backends.hpp"
#include "streamcheck/events.hpp"

namespace streamcheck {

// One fixture file describing every backend answer of a scenario. The
// schema is documented in docs/fixtures.md. Responses anywhere may be
// replaced by {"fault": "timeout" | "error" | "hang", "ms": N}.
struct FixtureScript {
  std::string name;
  std::string path;
  std::uint64_t seed = 0;
  // Seeds only the segmentation column shuffle, so local-speaker order can
  // vary while every other scripted answer stays fixed.
  std::uint64_t permutation_seed = 0;
  Json root;

  // Simulated service time per call: base + deterministic jitter in
  // [0, jitter) derived from (seed, interface, request key).
  double latency_ms = 0.0;
  double jitter_ms = 0.0;
  std::map<std::string, double> latency_overrides_ms;

  double latency_for(const std::string& interface, const std::string& key) const;
};

// Throws SchemaViolation whose field() names the offending section, with
// the JSON parse position for syntax errors.
FixtureScript load_script(const std::string& path);
FixtureScript parse_script(const std::string& content, const std::string& origin = "fixture");

// Applies "latency_ms", "jitter_ms", "seed", "permutation_seed" and
// "<interface>_latency_ms" overrides.
void apply_script_options(FixtureScript& script, const std::map<std::string, std::string>& options);

// All nine interfaces backed by one immutable script; safe for concurrent
// calls.
BackendSet make_mock_backends(std::shared_ptr<const FixtureScript> script);

// Deterministic 64-bit FNV-1a.
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0);

// Tone program of the "audio" section rendered at the canonical rate.
std::vector<float> render_fixture_audio(const FixtureScript& script);

}  // namespace streamcheck
