#include "streamcheck/http_backends.hpp"

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "streamcheck/config.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/http_util.hpp"
#include "streamcheck/util/text.hpp"

#ifndef STREAMCHECK_SOURCE_FIXTURES
#define STREAMCHECK_SOURCE_FIXTURES "fixtures"
#endif

namespace streamcheck {

namespace {

std::string samples_b64(const std::vector<float>& samples) { return text::base64_encode(float_to_s16le(samples)); }
std::vector<float> samples_from_b64(const std::string& b64) { return s16le_to_float(text::base64_decode(b64)); }

Json call(const std::string& url, double timeout, const Json& body) {
  const std::string out = http::post_json(url, body.dump(), timeout);
  try {
    return Json::parse(out);
  } catch (const Json::exception& e) {
    throw BackendError("malformed backend response from " + url + ": " + e.what());
  }
}

template <typename T>
T get_field(const Json& j, const char* key, const std::string& url) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw BackendError("backend response from " + url + " lacks '" + key + "'");
  }
}

struct Endpoint {
  std::string url;
  double timeout;
};

class HttpVad final : public VadBackend, Endpoint {
 public:
  HttpVad(std::string u, double t) : Endpoint{std::move(u), t} {}
  bool is_speech(const AudioChunk& c) override {
    Json r = call(url, timeout, {{"samples_b64", samples_b64(c.samples)}, {"sample_rate", c.sample_rate},
                                 {"start_time", c.start_time}, {"duration", c.duration}});
    return get_field<bool>(r, "speech", url);
  }
};

class HttpAsr final : public AsrBackend, Endpoint {
 public:
  HttpAsr(std::string u, double t) : Endpoint{std::move(u), t} {}
  std::vector<AsrSpan> transcribe(const AsrRequest& q) override {
    Json r = call(url, timeout, {{"samples_b64", samples_b64(q.samples)}, {"sample_rate", q.sample_rate},
                                 {"language", q.language}, {"stream_start", q.stream_start}});
    std::vector<AsrSpan> out;
    for (const auto& s : get_field<Json>(r, "spans", url))
      out.push_back({get_field<std::string>(s, "text", url), get_field<double>(s, "start", url),
                     get_field<double>(s, "end", url)});
    return out;
  }
};

class HttpSegmentation final : public SegmentationBackend, Endpoint {
 public:
  HttpSegmentation(std::string u, double t) : Endpoint{std::move(u), t} {}
  ActivityMatrix segment(const AudioWindow& w) override {
    Json r = call(url, timeout, {{"samples_b64", samples_b64(w.samples)}, {"sample_rate", w.sample_rate},
                                 {"window_start", w.start_time}});
    ActivityMatrix a;
    a.frame_duration = get_field<double>(r, "frame_duration", url);
    const auto rows = get_field<std::vector<std::vector<float>>>(r, "probs", url);
    a.frames = rows.size();
    a.speakers = rows.empty() ? 0 : rows[0].size();
    for (const auto& row : rows) {
      if (row.size() != a.speakers) throw BackendError("ragged activity matrix from " + url);
      a.probs.insert(a.probs.end(), row.begin(), row.end());
    }
    return a;
  }
};

class HttpEmbedding final : public EmbeddingBackend, Endpoint {
 public:
  HttpEmbedding(std::string u, double t) : Endpoint{std::move(u), t} {}
  std::vector<double> embed(const AudioWindow& w, const std::vector<bool>& mask, double fd) override {
    Json r = call(url, timeout, {{"samples_b64", samples_b64(w.samples)}, {"sample_rate", w.sample_rate},
                                 {"window_start", w.start_time}, {"mask", mask}, {"frame_duration", fd}});
    return get_field<std::vector<double>>(r, "embedding", url);
  }
};

class HttpClassifier final : public ClassifierBackend, Endpoint {
 public:
  HttpClassifier(std::string u, double t) : Endpoint{std::move(u), t} {}
  double score(const std::string& text) override {
    return get_field<double>(call(url, timeout, {{"text", text}}), "score", url);
  }
};

class HttpTextGen final : public TextGenBackend, Endpoint {
 public:
  HttpTextGen(std::string u, double t) : Endpoint{std::move(u), t} {}
  std::string complete(const PromptRequest& p) override {
    Json r = call(url, timeout, {{"template_id", p.template_id}, {"variables", p.variables}, {"prompt", p.prompt}});
    return get_field<std::string>(r, "text", url);
  }
};

class HttpSearch final : public SearchBackend, Endpoint {
 public:
  HttpSearch(std::string u, double t) : Endpoint{std::move(u), t} {}
  std::vector<EvidenceDoc> search(const SearchQuery& q) override {
    Json r = call(url, timeout, {{"query", q.query}, {"lang", q.language}, {"k", q.k}, {"claim_id", q.claim_id}});
    std::vector<EvidenceDoc> out;
    for (const auto& d : get_field<Json>(r, "docs", url)) {
      EvidenceDoc doc;
      doc.url = get_field<std::string>(d, "url", url);
      doc.title = d.value("title", std::string());
      doc.snippet = d.value("snippet", std::string());
      out.push_back(std::move(doc));
    }
    return out;
  }
};

class HttpRanker final : public RankerBackend, Endpoint {
 public:
  HttpRanker(std::string u, double t) : Endpoint{std::move(u), t} {}
  double score(const std::string& claim, const std::string& snippet) override {
    return get_field<double>(call(url, timeout, {{"claim", claim}, {"snippet", snippet}}), "score", url);
  }
};

class HttpNli final : public NliBackend, Endpoint {
 public:
  HttpNli(std::string u, double t) : Endpoint{std::move(u), t} {}
  NliResult classify(const std::string& claim, const std::string& evidence) override {
    Json r = call(url, timeout, {{"claim", claim}, {"evidence", evidence}});
    const std::string label = get_field<std::string>(r, "label", url);
    if (label != "supported" && label != "refuted") throw BackendError("unknown NLI label from " + url + ": " + label);
    return {label == "supported" ? NliLabel::supported : NliLabel::refuted, get_field<double>(r, "confidence", url)};
  }
};

}  // namespace

std::shared_ptr<VadBackend> http_vad(const std::string& u, double t) { return std::make_shared<HttpVad>(u, t); }
std::shared_ptr<AsrBackend> http_asr(const std::string& u, double t) { return std::make_shared<HttpAsr>(u, t); }
std::shared_ptr<SegmentationBackend> http_segmentation(const std::string& u, double t) {
  return std::make_shared<HttpSegmentation>(u, t);
}
std::shared_ptr<EmbeddingBackend> http_embedding(const std::string& u, double t) {
  return std::make_shared<HttpEmbedding>(u, t);
}
std::shared_ptr<ClassifierBackend> http_classifier(const std::string& u, double t) {
  return std::make_shared<HttpClassifier>(u, t);
}
std::shared_ptr<TextGenBackend> http_textgen(const std::string& u, double t) {
  return std::make_shared<HttpTextGen>(u, t);
}
std::shared_ptr<SearchBackend> http_search(const std::string& u, double t) { return std::make_shared<HttpSearch>(u, t); }
std::shared_ptr<RankerBackend> http_ranker(const std::string& u, double t) { return std::make_shared<HttpRanker>(u, t); }
std::shared_ptr<NliBackend> http_nli(const std::string& u, double t) { return std::make_shared<HttpNli>(u, t); }

// --- server ---

struct BackendServer::Impl {
  BackendSet backends;
  httplib::Server server;

  template <typename F>
  void route(const std::string& path, F handler) {
    server.Post(path, [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        const Json body = Json::parse(req.body);
        res.set_content(handler(body).dump(), "application/json");
      } catch (const BackendTimeout& e) {
        res.status = 504;
        res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
      } catch (const Json::exception& e) {
        res.status = 400;
        res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }

  explicit Impl(BackendSet b) : backends(std::move(b)) {
    auto& bk = backends;
    route("/vad", [&bk](const Json& j) {
      AudioChunk c;
      c.samples = samples_from_b64(j.at("samples_b64").get<std::string>());
      c.sample_rate = j.value("sample_rate", kCanonicalRate);
      c.start_time = j.value("start_time", 0.0);
      c.duration = j.value("duration", static_cast<double>(c.samples.size()) / c.sample_rate);
      return Json{{"speech", bk.vad->is_speech(c)}};
    });
    route("/asr", [&bk](const Json& j) {
      AsrRequest q;
      q.samples = samples_from_b64(j.at("samples_b64").get<std::string>());
      q.sample_rate = j.value("sample_rate", kCanonicalRate);
      q.language = j.value("language", std::string("en"));
      q.stream_start = j.value("stream_start", 0.0);
      Json spans = Json::array();
      for (const auto& s : bk.asr->transcribe(q)) spans.push_back({{"text", s.text}, {"start", s.start}, {"end", s.end}});
      return Json{{"spans", spans}};
    });
    route("/segmentation", [&bk](const Json& j) {
      AudioWindow w;
      w.samples = samples_from_b64(j.at("samples_b64").get<std::string>());
      w.sample_rate = j.value("sample_rate", kCanonicalRate);
      w.start_time = j.value("window_start", 0.0);
      ActivityMatrix a = bk.segmentation->segment(w);
      Json rows = Json::array();
      for (std::size_t f = 0; f < a.frames; ++f) {
        Json row = Json::array();
        for (std::size_t k = 0; k < a.speakers; ++k) row.push_back(a.at(f, k));
        rows.push_back(std::move(row));
      }
      return Json{{"frame_duration", a.frame_duration}, {"probs", rows}};
    });
    route("/embedding", [&bk](const Json& j) {
      AudioWindow w;
      w.samples = samples_from_b64(j.at("samples_b64").get<std::string>());
      w.sample_rate = j.value("sample_rate", kCanonicalRate);
      w.start_time = j.value("window_start", 0.0);
      const auto mask = j.at("mask").get<std::vector<bool>>();
      return Json{{"embedding", bk.embedding->embed(w, mask, j.at("frame_duration").get<double>())}};
    });
    route("/classifier", [&bk](const Json& j) {
      return Json{{"score", bk.classifier->score(j.at("text").get<std::string>())}};
    });
    route("/textgen", [&bk](const Json& j) {
      PromptRequest p;
      p.template_id = j.at("template_id").get<std::string>();
      p.variables = j.value("variables", std::map<std::string, std::string>{});
      p.prompt = j.value("prompt", std::string());
      return Json{{"text", bk.textgen->complete(p)}};
    });
    for (const auto& s : backends.search) {
      auto backend = s.backend;
      route("/search/" + s.name, [backend](const Json& j) {
        SearchQuery q{j.at("query").get<std::string>(), j.value("lang", std::string("en")),
                      j.value("k", std::size_t{5}), j.value("claim_id", std::string())};
        Json docs = Json::array();
        for (const auto& d : backend->search(q))
          docs.push_back({{"url", d.url}, {"title", d.title}, {"snippet", d.snippet}});
        return Json{{"docs", docs}};
      });
    }
    route("/ranker", [&bk](const Json& j) {
      return Json{{"score", bk.ranker->score(j.at("claim").get<std::string>(), j.at("snippet").get<std::string>())}};
    });
    route("/nli", [&bk](const Json& j) {
      NliResult r = bk.nli->classify(j.at("claim").get<std::string>(), j.at("evidence").get<std::string>());
      return Json{{"label", to_string(r.label)}, {"confidence", r.confidence}};
    });
  }
};

BackendServer::BackendServer(BackendSet backends) : impl_(std::make_unique<Impl>(std::move(backends))) {}

BackendServer::~BackendServer() { stop(); }

int BackendServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (port_ <= 0) throw Error("cannot bind backend server on " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

bool BackendServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  return impl_->server.listen(host, port);
}

void BackendServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string BackendServer::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

std::string BackendServer::endpoint_file() const {
  std::string out;
  for (const char* i : {"vad", "asr", "segmentation", "embedding", "classifier", "textgen", "ranker", "nli"})
    out += std::string(i) + "=" + base_url() + "/" + i + "\n";
  for (const auto& s : impl_->backends.search) out += "search." + s.name + "=" + base_url() + "/search/" + s.name + "\n";
  out += "internal_index=" + impl_->backends.internal_index + "\n";
  return out;
}

// --- resolution ---

std::string default_fixtures_dir() {
  if (const char* env = std::getenv("STREAMCHECK_FIXTURES"); env && *env) return env;
  return STREAMCHECK_SOURCE_FIXTURES;
}

namespace {

BackendSet resolve_mock(const std::string& spec, const std::string& fixtures_dir) {
  std::string body = spec.substr(5);
  std::map<std::string, std::string> options;
  if (auto q = body.find('?'); q != std::string::npos) {
    std::string query = body.substr(q + 1);
    body = body.substr(0, q);
    std::stringstream ss(query);
    std::string kv;
    while (std::getline(ss, kv, '&')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidConfig("bad mock option: " + kv);
      options[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  namespace fs = std::filesystem;
  std::string path = body;
  if (!fs::is_regular_file(path)) path = (fs::path(fixtures_dir) / (body + ".json")).string();
  if (!fs::is_regular_file(path)) throw InvalidConfig("mock fixture not found: " + body);
  auto script = std::make_shared<FixtureScript>(load_script(path));
  apply_script_options(*script, options);
  return make_mock_backends(script);
}

}  // namespace

BackendSet resolve_backends(const std::string& spec, const std::string& fixtures_dir) {
  if (spec.rfind("mock:", 0) == 0) return resolve_mock(spec, fixtures_dir);
  std::ifstream in(spec);
  if (!in) throw InvalidConfig("cannot read backends file: " + spec);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto lines = parse_key_value_lines(ss.str(), spec);

  BackendSet out;
  std::map<std::string, BackendSet> mocks;
  auto mock_for = [&](const std::string& value) -> BackendSet& {
    auto it = mocks.find(value);
    if (it == mocks.end()) it = mocks.emplace(value, resolve_mock(value, fixtures_dir)).first;
    return it->second;
  };
  for (const auto& [key, value] : lines) {
    const bool mock = value.rfind("mock:", 0) == 0;
    if (key == "internal_index") {
      out.internal_index = value;
    } else if (key == "vad") {
      out.vad = mock ? mock_for(value).vad : http_vad(value);
    } else if (key == "asr") {
      out.asr = mock ? mock_for(value).asr : http_asr(value);
    } else if (key == "segmentation") {
      out.segmentation = mock ? mock_for(value).segmentation : http_segmentation(value);
    } else if (key == "embedding") {
      out.embedding = mock ? mock_for(value).embedding : http_embedding(value);
    } else if (key == "classifier") {
      out.classifier = mock ? mock_for(value).classifier : http_classifier(value);
    } else if (key == "textgen") {
      out.textgen = mock ? mock_for(value).textgen : http_textgen(value);
    } else if (key == "ranker") {
      out.ranker = mock ? mock_for(value).ranker : http_ranker(value);
    } else if (key == "nli") {
      out.nli = mock ? mock_for(value).nli : http_nli(value);
    } else if (key == "search") {
      if (!mock) throw InvalidConfig("plain 'search' needs a mock spec; name HTTP search backends search.<name>");
      for (const auto& s : mock_for(value).search) out.search.push_back(s);
    } else if (key.rfind("search.", 0) == 0) {
      const std::string name = key.substr(7);
      if (mock) {
        for (const auto& s : mock_for(value).search)
          if (s.name == name) out.search.push_back(s);
      } else {
        out.search.push_back({name, http_search(value)});
      }
    } else {
      throw InvalidConfig("unknown backend interface: " + key);
    }
  }
  out.validate();
  return out;
}

}  // namespace streamcheck
