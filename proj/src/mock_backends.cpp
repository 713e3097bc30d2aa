#include "streamcheck/mock_backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "streamcheck/error.hpp"
#include "streamcheck/transcribe.hpp"

namespace streamcheck {

namespace {

constexpr const char* kSections[] = {"vad",        "asr",    "segmentation", "embedding", "classifier",
                                     "textgen",    "search", "ranker",       "nli"};

[[noreturn]] void violation(const std::string& field, const std::string& what) {
  throw SchemaViolation(field, "fixture field '" + field + "': " + what);
}

const Json& need(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) violation(path + "." + key, "missing");
  return obj.at(key);
}

double num(const Json& v, const std::string& path) {
  if (!v.is_number()) violation(path, "expected a number");
  return v.get<double>();
}

std::string str(const Json& v, const std::string& path) {
  if (!v.is_string()) violation(path, "expected a string");
  return v.get<std::string>();
}

double num_or(const Json& obj, const char* key, double fallback, const std::string& path) {
  return obj.contains(key) ? num(obj.at(key), path + "." + key) : fallback;
}

bool is_fault(const Json& v) { return v.is_object() && v.contains("fault"); }

void check_fault(const Json& v, const std::string& path) {
  const std::string kind = str(v.at("fault"), path + ".fault");
  if (kind != "timeout" && kind != "error" && kind != "hang") violation(path + ".fault", "unknown fault '" + kind + "'");
  if (v.contains("ms")) num(v.at("ms"), path + ".ms");
}

[[noreturn]] void raise_fault(const Json& v, const std::string& where) {
  const std::string kind = v.at("fault").get<std::string>();
  if (kind == "hang") {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(v.value("ms", 10000.0)));
    throw BackendTimeout(where + ": scripted hang");
  }
  if (kind == "timeout") throw BackendTimeout(where + ": scripted timeout");
  throw BackendError(where + ": scripted error");
}

struct TimedFault {
  double t_start, t_end;
  Json fault;
};

std::vector<TimedFault> parse_faults(const Json& section, const std::string& path) {
  std::vector<TimedFault> out;
  if (!section.contains("faults")) return out;
  const Json& arr = section.at("faults");
  if (!arr.is_array()) violation(path + ".faults", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + ".faults[" + std::to_string(i) + "]";
    TimedFault f{num(need(arr[i], "t_start", p), p + ".t_start"), num(need(arr[i], "t_end", p), p + ".t_end"), arr[i]};
    check_fault(arr[i], p);
    out.push_back(std::move(f));
  }
  return out;
}

const TimedFault* fault_overlapping(const std::vector<TimedFault>& faults, double a, double b) {
  for (const auto& f : faults)
    if (f.t_start < b && a < f.t_end) return &f;
  return nullptr;
}

struct Turn {
  std::string speaker;
  double t_start, t_end;
};

struct Span {
  std::string text;
  double start, end;
};

struct Doc {
  std::string url, title, snippet;
};

struct Model {
  // vad
  double vad_threshold = 1e-4;
  std::optional<std::vector<std::pair<double, double>>> vad_speech;
  std::vector<TimedFault> vad_faults;
  // asr
  std::vector<Span> asr_spans;
  std::vector<TimedFault> asr_faults;
  // segmentation
  double frame_duration = 0.1;
  std::size_t local_speakers = 3;
  double p_active = 0.9, p_inactive = 0.05;
  bool permute = true;
  std::vector<Turn> turns;
  std::vector<std::string> speaker_order;
  std::vector<TimedFault> seg_faults;
  // embedding
  std::size_t dimension = 8;
  double noise = 0.0;
  std::map<std::string, std::vector<double>> base_vectors;
  std::optional<std::vector<double>> default_vector;
  std::vector<TimedFault> emb_faults;
};

std::vector<double> vec(const Json& v, std::size_t dim, const std::string& path) {
  if (!v.is_array()) violation(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(num(v[i], path + "[" + std::to_string(i) + "]"));
  if (out.size() != dim) violation(path, "expected " + std::to_string(dim) + " components");
  return out;
}

void check_scored_map(const Json& section, const char* key, const std::string& path) {
  if (!section.contains(key)) return;
  const Json& m = section.at(key);
  if (!m.is_object()) violation(path + "." + key, "expected an object");
  for (const auto& [k, v] : m.items())
    if (is_fault(v)) check_fault(v, path + "." + key + "." + k); else num(v, path + "." + key + "." + k);
}

void check_docs(const Json& v, const std::string& path) {
  if (is_fault(v)) return check_fault(v, path);
  if (!v.is_array()) violation(path, "expected an array of docs");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    str(need(v[i], "url", p), p + ".url");
    if (v[i].contains("title")) str(v[i].at("title"), p + ".title");
    if (v[i].contains("snippet")) str(v[i].at("snippet"), p + ".snippet");
  }
}

void check_nli_result(const Json& v, const std::string& path) {
  if (is_fault(v)) return check_fault(v, path);
  const std::string label = str(need(v, "label", path), path + ".label");
  if (label != "supported" && label != "refuted") violation(path + ".label", "expected supported|refuted");
  num(need(v, "confidence", path), path + ".confidence");
}

Model parse_model(const Json& root) {
  Model m;
  for (const char* s : kSections)
    if (!root.contains(s)) violation(s, std::string("missing section '") + s + "'");

  const Json& vad = root.at("vad");
  m.vad_threshold = num_or(vad, "threshold", 1e-4, "vad");
  if (vad.contains("speech")) {
    std::vector<std::pair<double, double>> w;
    for (std::size_t i = 0; i < vad.at("speech").size(); ++i) {
      const Json& e = vad.at("speech")[i];
      const std::string p = "vad.speech[" + std::to_string(i) + "]";
      if (!e.is_array() || e.size() != 2) violation(p, "expected [t_start, t_end]");
      w.emplace_back(num(e[0], p), num(e[1], p));
    }
    m.vad_speech = std::move(w);
  }
  m.vad_faults = parse_faults(vad, "vad");

  const Json& asr = root.at("asr");
  const Json& spans = need(asr, "spans", "asr");
  if (!spans.is_array()) violation("asr.spans", "expected an array");
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string p = "asr.spans[" + std::to_string(i) + "]";
    Span s{str(need(spans[i], "text", p), p + ".text"), num(need(spans[i], "start", p), p + ".start"),
           num(need(spans[i], "end", p), p + ".end")};
    if (!(s.end > s.start)) violation(p, "end must exceed start");
    m.asr_spans.push_back(std::move(s));
  }
  m.asr_faults = parse_faults(asr, "asr");

  const Json& seg = root.at("segmentation");
  m.frame_duration = num_or(seg, "frame_duration", 0.1, "segmentation");
  if (!(m.frame_duration > 0)) violation("segmentation.frame_duration", "must be positive");
  m.local_speakers = static_cast<std::size_t>(num_or(seg, "local_speakers", 3, "segmentation"));
  m.p_active = num_or(seg, "p_active", 0.9, "segmentation");
  m.p_inactive = num_or(seg, "p_inactive", 0.05, "segmentation");
  m.permute = seg.value("permute", true);
  const Json& turns = need(seg, "turns", "segmentation");
  if (!turns.is_array()) violation("segmentation.turns", "expected an array");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const std::string p = "segmentation.turns[" + std::to_string(i) + "]";
    Turn t{str(need(turns[i], "speaker", p), p + ".speaker"), num(need(turns[i], "t_start", p), p + ".t_start"),
           num(need(turns[i], "t_end", p), p + ".t_end")};
    if (std::find(m.speaker_order.begin(), m.speaker_order.end(), t.speaker) == m.speaker_order.end())
      m.speaker_order.push_back(t.speaker);
    m.turns.push_back(std::move(t));
  }
  if (m.speaker_order.size() > m.local_speakers) violation("segmentation.local_speakers", "fewer columns than speakers");
  m.seg_faults = parse_faults(seg, "segmentation");

  const Json& emb = root.at("embedding");
  m.dimension = static_cast<std::size_t>(num_or(emb, "dimension", 8, "embedding"));
  if (m.dimension == 0) violation("embedding.dimension", "must be positive");
  m.noise = num_or(emb, "noise", 0.0, "embedding");
  const Json& speakers = need(emb, "speakers", "embedding");
  if (!speakers.is_object()) violation("embedding.speakers", "expected an object");
  for (const auto& [name, v] : speakers.items()) m.base_vectors[name] = vec(v, m.dimension, "embedding.speakers." + name);
  for (const auto& s : m.speaker_order)
    if (!m.base_vectors.count(s)) violation("embedding.speakers." + s, "no base vector for scripted speaker");
  if (emb.contains("default")) m.default_vector = vec(emb.at("default"), m.dimension, "embedding.default");
  m.emb_faults = parse_faults(emb, "embedding");

  const Json& clf = root.at("classifier");
  check_scored_map(clf, "scores", "classifier");
  if (clf.contains("default") && !is_fault(clf.at("default"))) num(clf.at("default"), "classifier.default");

  const Json& gen = root.at("textgen");
  if (!gen.is_object()) violation("textgen", "expected an object");
  for (const auto& [tid, t] : gen.items()) {
    const std::string p = "textgen." + tid;
    if (!t.is_object()) violation(p, "expected an object");
    if (t.contains("responses")) {
      for (const auto& [k, v] : t.at("responses").items())
        if (is_fault(v)) check_fault(v, p + ".responses." + k); else str(v, p + ".responses." + k);
    }
    if (t.contains("default") && !is_fault(t.at("default"))) str(t.at("default"), p + ".default");
  }

  const Json& search = root.at("search");
  const Json& backends = need(search, "backends", "search");
  if (!backends.is_array() || backends.empty()) violation("search.backends", "expected a non-empty array");
  for (std::size_t i = 0; i < backends.size(); ++i) {
    const std::string p = "search.backends[" + std::to_string(i) + "]";
    str(need(backends[i], "name", p), p + ".name");
    for (const char* key : {"queries", "claims"}) {
      if (!backends[i].contains(key)) continue;
      for (const auto& [k, v] : backends[i].at(key).items()) check_docs(v, p + "." + key + "." + k);
    }
    if (backends[i].contains("default")) check_docs(backends[i].at("default"), p + ".default");
  }

  const Json& ranker = root.at("ranker");
  check_scored_map(ranker, "scores", "ranker");
  if (ranker.contains("default") && !is_fault(ranker.at("default"))) num(ranker.at("default"), "ranker.default");

  const Json& nli = root.at("nli");
  if (nli.contains("results"))
    for (const auto& [k, v] : nli.at("results").items()) check_nli_result(v, "nli.results." + k);
  if (nli.contains("default")) check_nli_result(nli.at("default"), "nli.default");
  return m;
}

class Latency {
 public:
  Latency(std::shared_ptr<const FixtureScript> s, std::string interface)
      : script_(std::move(s)), interface_(std::move(interface)) {}
  void wait(const std::string& key) const {
    const double ms = script_->latency_for(interface_, key);
    if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }

 protected:
  std::shared_ptr<const FixtureScript> script_;
  std::string interface_;
};

std::string time_key(double t) { return std::to_string(std::llround(t * 1000.0)); }

class MockVad final : public VadBackend, Latency {
 public:
  MockVad(std::shared_ptr<const FixtureScript> s, std::shared_ptr<const Model> m)
      : Latency(std::move(s), "vad"), m_(std::move(m)), energy_(m_->vad_threshold) {}
  bool is_speech(const AudioChunk& chunk) override {
    wait(time_key(chunk.start_time));
    if (auto* f = fault_overlapping(m_->vad_faults, chunk.start_time, chunk.end_time())) raise_fault(f->fault, "vad");
    if (!m_->vad_speech) return energy_.is_speech(chunk);
    const double mid = chunk.start_time + chunk.duration / 2;
    for (const auto& [a, b] : *m_->vad_speech)
      if (mid >= a && mid < b) return true;
    return false;
  }

 private:
  std::shared_ptr<const Model> m_;
  EnergyVad energy_;
};

class MockAsr final : public AsrBackend, Latency {
 public:
  MockAsr(std::shared_ptr<const FixtureScript> s, std::shared_ptr<const Model> m)
      : Latency(std::move(s), "asr"), m_(std::move(m)) {}
  std::vector<AsrSpan> transcribe(const AsrRequest& r) override {
    const double dur = static_cast<double>(r.samples.size()) / r.sample_rate;
    const double a = r.stream_start, b = r.stream_start + dur;
    wait(time_key(a));
    if (auto* f = fault_overlapping(m_->asr_faults, a, b)) raise_fault(f->fault, "asr");
    std::vector<AsrSpan> out;
    for (const auto& s : m_->asr_spans) {
      const double mid = (s.start + s.end) / 2;
      if (mid < a || mid >= b) continue;
      out.push_back({s.text, std::clamp(s.start - a, 0.0, dur), std::clamp(s.end - a, 0.0, dur)});
    }
    return out;
  }

 private:
  std::shared_ptr<const Model> m_;
};

bool speaking(const Model& m, const std::string& speaker, double t) {
  for (const auto& turn : m.turns)
    if (turn.speaker == speaker && t >= turn.t_start && t < turn.t_end) return true;
  return false;
}

class MockSegmentation final : public SegmentationBackend, Latency {
 public:
  MockSegmentation(std::shared_ptr<const FixtureScript> s, std::shared_ptr<const Model> m)
      : Latency(s, "segmentation"), m_(std::move(m)), seed_(s->permutation_seed) {}
  ActivityMatrix segment(const AudioWindow& w) override {
    const double len = static_cast<double>(w.samples.size()) / w.sample_rate;
    wait(time_key(w.start_time));
    if (auto* f = fault_overlapping(m_->seg_faults, w.start_time, w.start_time + len))
      raise_fault(f->fault, "segmentation");
    ActivityMatrix a;
    a.frame_duration = m_->frame_duration;
    a.frames = static_cast<std::size_t>(std::llround(len / m_->frame_duration));
    a.speakers = m_->local_speakers;
    a.probs.assign(a.frames * a.speakers, static_cast<float>(m_->p_inactive));
    std::vector<std::size_t> column(a.speakers);
    std::iota(column.begin(), column.end(), 0);
    if (m_->permute) {
      std::mt19937_64 rng(stable_hash("perm:" + time_key(w.start_time), seed_));
      for (std::size_t i = column.size(); i > 1; --i) std::swap(column[i - 1], column[rng() % i]);
    }
    for (std::size_t f = 0; f < a.frames; ++f) {
      const double mid = w.start_time + (static_cast<double>(f) + 0.5) * m_->frame_duration;
      for (std::size_t k = 0; k < m_->speaker_order.size(); ++k)
        if (speaking(*m_, m_->speaker_order[k], mid)) a.at(f, column[k]) = static_cast<float>(m_->p_active);
    }
    return a;
  }

 private:
  std::shared_ptr<const Model> m_;
  std::uint64_t seed_;
};

class MockEmbedding final : public EmbeddingBackend, Latency {
 public:
  MockEmbedding(std::shared_ptr<const FixtureScript> s, std::shared_ptr<const Model> m)
      : Latency(s, "embedding"), m_(std::move(m)), seed_(s->seed) {}
  std::vector<double> embed(const AudioWindow& w, const std::vector<bool>& mask, double frame_duration) override {
    const double len = static_cast<double>(w.samples.size()) / w.sample_rate;
    std::map<std::string, std::size_t> votes;
    for (std::size_t f = 0; f < mask.size(); ++f) {
      if (!mask[f]) continue;
      const double mid = w.start_time + (static_cast<double>(f) + 0.5) * frame_duration;
      for (const auto& sp : m_->speaker_order)
        if (speaking(*m_, sp, mid)) ++votes[sp];
    }
    std::string who;
    std::size_t best = 0;
    for (const auto& [sp, n] : votes)
      if (n > best) best = n, who = sp;
    wait(time_key(w.start_time) + ":" + who);
    if (auto* f = fault_overlapping(m_->emb_faults, w.start_time, w.start_time + len)) raise_fault(f->fault, "embedding");
    std::vector<double> v;
    if (!who.empty()) {
      v = m_->base_vectors.at(who);
    } else if (m_->default_vector) {
      v = *m_->default_vector;
    } else {
      throw BackendError("embedding: mask matches no scripted speaker");
    }
    if (m_->noise > 0) {
      std::mt19937_64 rng(stable_hash("emb:" + who + ":" + time_key(w.start_time), seed_));
      std::normal_distribution<double> n(0.0, m_->noise);
      for (auto& x : v) x += n(rng);
    }
    return v;
  }

 private:
  std::shared_ptr<const Model> m_;
  std::uint64_t seed_;
};

double scored(const Json& section, const std::string& key, const char* where) {
  const Json* v = nullptr;
  if (section.contains("scores") && section.at("scores").contains(key)) {
    v = &section.at("scores").at(key);
  } else if (section.contains("default")) {
    v = &section.at("default");
  }
  if (!v) throw BackendError(std::string(where) + ": unscripted input");
  if (is_fault(*v)) raise_fault(*v, where);
  return v->get<double>();
}

class MockClassifier final : public ClassifierBackend, Latency {
 public:
  explicit MockClassifier(std::shared_ptr<const FixtureScript> s) : Latency(s, "classifier"), section_(s->root.at("classifier")) {}
  double score(const std::string& text) override {
    wait(text);
    return scored(section_, text, "classifier");
  }

 private:
  const Json& section_;
};

std::string default_key_variable(const std::string& template_id) {
  if (template_id == "normalize_v1") return "sentence";
  if (template_id == "topic_v1") return "text";
  return "claim";
}

class MockTextGen final : public TextGenBackend, Latency {
 public:
  explicit MockTextGen(std::shared_ptr<const FixtureScript> s) : Latency(s, "textgen"), section_(s->root.at("textgen")) {}
  std::string complete(const PromptRequest& r) override {
    if (!section_.contains(r.template_id)) throw BackendError("textgen: unscripted template " + r.template_id);
    const Json& t = section_.at(r.template_id);
    const std::string var = t.value("key", default_key_variable(r.template_id));
    auto it = r.variables.find(var);
    const std::string key = it == r.variables.end() ? std::string() : it->second;
    wait(r.template_id + ":" + key);
    const Json* v = nullptr;
    if (t.contains("responses") && t.at("responses").contains(key)) {
      v = &t.at("responses").at(key);
    } else if (t.contains("default")) {
      v = &t.at("default");
    }
    if (!v) throw BackendError("textgen: unscripted " + r.template_id + " input");
    if (is_fault(*v)) raise_fault(*v, "textgen");
    return v->get<std::string>();
  }

 private:
  const Json& section_;
};

class MockSearch final : public SearchBackend, Latency {
 public:
  MockSearch(std::shared_ptr<const FixtureScript> s, const Json& backend)
      : Latency(s, "search"), backend_(backend), name_(backend.at("name").get<std::string>()) {}
  std::vector<EvidenceDoc> search(const SearchQuery& q) override {
    wait(name_ + ":" + q.query);
    const Json* v = nullptr;
    if (backend_.contains("queries") && backend_.at("queries").contains(q.query)) {
      v = &backend_.at("queries").at(q.query);
    } else if (backend_.contains("claims") && backend_.at("claims").contains(q.claim_id)) {
      v = &backend_.at("claims").at(q.claim_id);
    } else if (backend_.contains("default")) {
      v = &backend_.at("default");
    }
    std::vector<EvidenceDoc> out;
    if (!v) return out;
    if (is_fault(*v)) raise_fault(*v, "search:" + name_);
    for (const auto& d : *v) {
      if (out.size() >= q.k) break;
      EvidenceDoc doc;
      doc.url = d.at("url").get<std::string>();
      doc.title = d.value("title", std::string());
      doc.snippet = d.value("snippet", std::string());
      out.push_back(std::move(doc));
    }
    return out;
  }

 private:
  const Json& backend_;
  std::string name_;
};

const Json* pair_entry(const Json& section, const std::string& claim, const std::string& snippet) {
  if (!section.contains("pairs")) return nullptr;
  for (const auto& p : section.at("pairs"))
    if (p.value("claim", std::string()) == claim && p.value("snippet", std::string()) == snippet) return &p;
  return nullptr;
}

class MockRanker final : public RankerBackend, Latency {
 public:
  explicit MockRanker(std::shared_ptr<const FixtureScript> s) : Latency(s, "ranker"), section_(s->root.at("ranker")) {}
  double score(const std::string& claim, const std::string& snippet) override {
    wait(claim + "\x1f" + snippet);
    if (const Json* p = pair_entry(section_, claim, snippet)) {
      if (is_fault(*p)) raise_fault(*p, "ranker");
      return p->at("score").get<double>();
    }
    return scored(section_, snippet, "ranker");
  }

 private:
  const Json& section_;
};

class MockNli final : public NliBackend, Latency {
 public:
  explicit MockNli(std::shared_ptr<const FixtureScript> s) : Latency(s, "nli"), section_(s->root.at("nli")) {}
  NliResult classify(const std::string& claim, const std::string& snippet) override {
    wait(claim + "\x1f" + snippet);
    const Json* v = pair_entry(section_, claim, snippet);
    if (!v && section_.contains("results") && section_.at("results").contains(snippet))
      v = &section_.at("results").at(snippet);
    if (!v && section_.contains("default")) v = &section_.at("default");
    if (!v) throw BackendError("nli: unscripted input");
    if (is_fault(*v)) raise_fault(*v, "nli");
    NliResult r;
    r.label = v->at("label").get<std::string>() == "supported" ? NliLabel::supported : NliLabel::refuted;
    r.confidence = v->at("confidence").get<double>();
    return r;
  }

 private:
  const Json& section_;
};

}  // namespace

std::uint64_t stable_hash(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double FixtureScript::latency_for(const std::string& interface, const std::string& key) const {
  auto it = latency_overrides_ms.find(interface);
  const double base = it == latency_overrides_ms.end() ? latency_ms : it->second;
  if (jitter_ms <= 0) return base;
  const std::uint64_t h = stable_hash(interface + "\x1f" + key, seed);
  return base + jitter_ms * static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
}

FixtureScript parse_script(const std::string& content, const std::string& origin) {
  FixtureScript s;
  s.path = origin;
  try {
    s.root = Json::parse(content);
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, content.size());
    const auto line = 1 + std::count(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
    throw SchemaViolation("", origin + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }
  if (!s.root.is_object()) violation("", "top level must be an object");
  s.name = s.root.value("name", std::string());
  if (s.root.contains("seed")) s.seed = static_cast<std::uint64_t>(num(s.root.at("seed"), "seed"));
  s.permutation_seed = s.seed;
  if (s.root.contains("latency")) {
    const Json& l = s.root.at("latency");
    s.latency_ms = num_or(l, "base_ms", 0.0, "latency");
    s.jitter_ms = num_or(l, "jitter_ms", 0.0, "latency");
    if (l.contains("per_interface"))
      for (const auto& [k, v] : l.at("per_interface").items())
        s.latency_overrides_ms[k] = num(v, "latency.per_interface." + k);
  }
  parse_model(s.root);
  return s;
}

FixtureScript load_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaViolation("", "cannot read fixture: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str(), path);
}

void apply_script_options(FixtureScript& script, const std::map<std::string, std::string>& options) {
  for (const auto& [k, v] : options) {
    double x;
    try {
      x = std::stod(v);
    } catch (const std::exception&) {
      throw InvalidConfig("mock option " + k + " is not a number: " + v);
    }
    if (k == "latency_ms") {
      script.latency_ms = x;
      script.latency_overrides_ms.clear();
    } else if (k == "jitter_ms") {
      script.jitter_ms = x;
    } else if (k == "seed") {
      script.seed = static_cast<std::uint64_t>(x);
    } else if (k == "permutation_seed") {
      script.permutation_seed = static_cast<std::uint64_t>(x);
    } else if (k.size() > 11 && k.compare(k.size() - 11, 11, "_latency_ms") == 0) {
      script.latency_overrides_ms[k.substr(0, k.size() - 11)] = x;
    } else {
      throw InvalidConfig("unknown mock option: " + k);
    }
  }
}

BackendSet make_mock_backends(std::shared_ptr<const FixtureScript> script) {
  auto model = std::make_shared<const Model>(parse_model(script->root));
  BackendSet b;
  b.vad = std::make_shared<MockVad>(script, model);
  b.asr = std::make_shared<MockAsr>(script, model);
  b.segmentation = std::make_shared<MockSegmentation>(script, model);
  b.embedding = std::make_shared<MockEmbedding>(script, model);
  b.classifier = std::make_shared<MockClassifier>(script);
  b.textgen = std::make_shared<MockTextGen>(script);
  for (const auto& backend : script->root.at("search").at("backends"))
    b.search.push_back({backend.at("name").get<std::string>(), std::make_shared<MockSearch>(script, backend)});
  b.internal_index = script->root.at("search").value("internal_index", std::string("factindex"));
  b.ranker = std::make_shared<MockRanker>(script);
  b.nli = std::make_shared<MockNli>(script);
  return b;
}

std::vector<float> render_fixture_audio(const FixtureScript& script) {
  if (!script.root.contains("audio")) throw SchemaViolation("audio", "fixture has no audio section");
  const Json& a = script.root.at("audio");
  const double duration = num(need(a, "duration", "audio"), "audio.duration");
  std::vector<float> out(static_cast<std::size_t>(std::llround(duration * kCanonicalRate)), 0.0f);
  const Json tones = a.value("tones", Json::array());
  for (std::size_t i = 0; i < tones.size(); ++i) {
    const std::string p = "audio.tones[" + std::to_string(i) + "]";
    const double t0 = num(need(tones[i], "t_start", p), p), t1 = num(need(tones[i], "t_end", p), p);
    const double freq = num(need(tones[i], "freq", p), p), amp = num_or(tones[i], "amplitude", 0.3, p);
    const auto s0 = static_cast<std::size_t>(std::llround(std::max(0.0, t0) * kCanonicalRate));
    const auto s1 = std::min(out.size(), static_cast<std::size_t>(std::llround(t1 * kCanonicalRate)));
    for (std::size_t n = s0; n < s1; ++n) {
      const double t = static_cast<double>(n) / kCanonicalRate;
      out[n] = static_cast<float>(std::clamp(out[n] + amp * std::sin(2.0 * M_PI * freq * t), -1.0, 1.0));
    }
  }
  return out;
}

}  // namespace streamcheck
