#include "streamcheck/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "streamcheck/error.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck {

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": not a number: '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long n = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw InvalidConfig(key + ": not an integer: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = text::to_lower_ascii(v);
  if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
  if (l == "false" || l == "0" || l == "no" || l == "off") return false;
  throw InvalidConfig(key + ": not a boolean: '" + v + "'");
}

// Shortest decimal form that parses back to the same double.
std::string fmt(double d) {
  for (int precision = 6;; ++precision) {
    std::ostringstream os;
    os.precision(precision);
    os << d;
    if (precision >= 17 || std::stod(os.str()) == d) return os.str();
  }
}

struct Field {
  std::function<void(EngineConfig&, const std::string&)> set;
  std::function<std::string(const EngineConfig&)> get;
};

#define SC_DOUBLE(name, member)                                                      \
  {                                                                                  \
    name, {                                                                          \
      [](EngineConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
          [](const EngineConfig& c) { return fmt(c.member); }                        \
    }                                                                                \
  }
#define SC_INT(name, member, type)                                                                  \
  {                                                                                                 \
    name, {                                                                                         \
      [](EngineConfig& c, const std::string& v) {                                                   \
        const long n = to_long(name, v);                                                            \
        if (n < 0) throw InvalidConfig(std::string(name) + " must be non-negative");                \
        c.member = static_cast<type>(n);                                                            \
      },                                                                                            \
          [](const EngineConfig& c) { return std::to_string(c.member); }                            \
    }                                                                                               \
  }
#define SC_STRING(name, member)                                             \
  {                                                                         \
    name, {                                                                 \
      [](EngineConfig& c, const std::string& v) { c.member = v; },          \
          [](const EngineConfig& c) { return c.member; }                    \
    }                                                                       \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table{
      SC_STRING("language", language),
      SC_DOUBLE("chunk_duration", ingest.chunk_duration),
      SC_STRING("decode_adapter", ingest.decode_adapter),
      SC_DOUBLE("min_poll_interval", ingest.min_poll_interval),
      SC_INT("fetch_retries", ingest.fetch_retries, int),
      SC_DOUBLE("http_timeout", ingest.http_timeout),
      SC_INT("hangover_silence", hangover_silence, int),
      SC_DOUBLE("max_utterance", max_utterance),
      SC_DOUBLE("asr_min_deadline", transcribe.min_deadline),
      SC_DOUBLE("asr_deadline_fraction", transcribe.deadline_fraction),
      SC_DOUBLE("tau_active", diarization.tau_active),
      SC_DOUBLE("delta_new", diarization.delta_new),
      SC_DOUBLE("activity_fraction", diarization.activity_fraction),
      SC_DOUBLE("diarization_window", diarization.window),
      SC_DOUBLE("diarization_hop", diarization.hop),
      SC_DOUBLE("merge_gap", diarization.merge_gap),
      SC_DOUBLE("diarization_deadline", diarization.backend_deadline),
      SC_INT("max_local_speakers", diarization.max_local_speakers, std::size_t),
      SC_DOUBLE("min_overlap", alignment.min_overlap),
      SC_DOUBLE("alignment_grace", alignment.grace_stream),
      SC_DOUBLE("alignment_wall_grace", alignment.grace_wall),
      SC_DOUBLE("checkworthy_threshold", claims.checkworthy_threshold),
      SC_INT("num_questions", claims.num_questions, int),
      SC_INT("context_sentences", claims.context_sentences, std::size_t),
      SC_DOUBLE("claim_deadline", claims.backend_deadline),
      SC_DOUBLE("claim_dedup_threshold", claims.dedup_threshold),
      SC_DOUBLE("claim_dedup_window", claims.dedup_window),
      SC_INT("max_claims_in_flight", claims.max_in_flight, std::size_t),
      SC_INT("per_backend_k", gather.per_backend_k, std::size_t),
      SC_DOUBLE("search_deadline", gather.deadline),
      SC_STRING("blocklist", blocklist_path),
      SC_DOUBLE("evidence_jaccard", evidence_jaccard),
      SC_INT("top_k", rank.top_k, std::size_t),
      SC_DOUBLE("min_relevance", rank.min_relevance),
      SC_DOUBLE("ranker_deadline", rank.deadline),
      SC_DOUBLE("nli_deadline", nli_deadline),
      SC_DOUBLE("justification_deadline", justification_deadline),
      SC_STRING("prompts_dir", prompts_dir),
      {"realtime",
       {[](EngineConfig& c, const std::string& v) { c.realtime = to_bool("realtime", v); },
        [](const EngineConfig& c) { return std::string(c.realtime ? "true" : "false"); }}},
      SC_DOUBLE("realtime_speed", realtime_speed),
      SC_INT("queue_capacity", queue_capacity, std::size_t),
      SC_DOUBLE("stop_grace", stop_grace),
  };
  return table;
}

#undef SC_DOUBLE
#undef SC_INT
#undef SC_STRING

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig(what);
}

}  // namespace

void EngineConfig::validate() const {
  require(!language.empty(), "language must be non-empty");
  require(ingest.chunk_duration >= 0.1 && ingest.chunk_duration <= 2.0, "chunk_duration must lie in [0.1, 2.0]");
  require(ingest.min_poll_interval > 0.0, "min_poll_interval must be positive");
  require(ingest.http_timeout > 0.0, "http_timeout must be positive");
  require(hangover_silence >= 0, "hangover_silence must be non-negative");
  require(max_utterance > 0.0, "max_utterance must be positive");
  require(transcribe.min_deadline > 0.0, "asr_min_deadline must be positive");
  require(transcribe.deadline_fraction > 0.0, "asr_deadline_fraction must be positive");
  diarization.validate();
  require(alignment.min_overlap >= 0.0 && alignment.min_overlap <= 1.0, "min_overlap must lie in [0, 1]");
  require(alignment.grace_stream >= 0.0, "alignment_grace must be non-negative");
  require(alignment.grace_wall > 0.0, "alignment_wall_grace must be positive");
  claims.validate();
  require(gather.per_backend_k >= 1, "per_backend_k must be at least 1");
  require(gather.deadline > 0.0, "search_deadline must be positive");
  require(evidence_jaccard > 0.0 && evidence_jaccard <= 1.0, "evidence_jaccard must lie in (0, 1]");
  require(rank.top_k >= 1, "top_k must be at least 1");
  require(rank.min_relevance >= 0.0 && rank.min_relevance <= 1.0, "min_relevance must lie in [0, 1]");
  require(rank.deadline > 0.0, "ranker_deadline must be positive");
  require(nli_deadline > 0.0, "nli_deadline must be positive");
  require(justification_deadline > 0.0, "justification_deadline must be positive");
  require(realtime_speed > 0.0, "realtime_speed must be positive");
  require(queue_capacity >= 1, "queue_capacity must be at least 1");
  require(stop_grace >= 0.0, "stop_grace must be non-negative");
}

std::set<std::string> EngineConfig::blocklist() const {
  return blocklist_path.empty() ? default_blocklist() : load_blocklist(blocklist_path);
}

EngineConfig apply_overrides(EngineConfig base, const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = fields().find(key);
    if (it == fields().end()) throw InvalidConfig("unknown config key: " + key);
    it->second.set(base, value);
  }
  base.validate();
  return base;
}

std::vector<std::pair<std::string, std::string>> parse_key_value_lines(const std::string& content,
                                                                       const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = text::trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw InvalidConfig(origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, text::trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& content, const std::string& origin) {
  std::map<std::string, std::string> out;
  for (auto& [k, v] : parse_key_value_lines(content, origin)) out[k] = std::move(v);
  return out;
}

EngineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return apply_overrides(EngineConfig{}, parse_key_values(ss.str(), path));
}

std::map<std::string, std::string> describe(const EngineConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, f] : fields()) out[key] = f.get(config);
  return out;
}

}  // namespace streamcheck
