#include "streamcheck/session.hpp"

#include <algorithm>
#include <filesystem>

#include "streamcheck/error.hpp"
#include "streamcheck/ingest.hpp"

namespace streamcheck {

std::string to_string(SessionState state) {
  switch (state) {
    case SessionState::created: return "created";
    case SessionState::running: return "running";
    case SessionState::stopped: return "stopped";
    case SessionState::finished: return "finished";
    default: return "failed";
  }
}

namespace {

std::string to_string(EndReason r) {
  switch (r) {
    case EndReason::end_of_file: return "end_of_file";
    case EndReason::playlist_ended: return "playlist_ended";
    case EndReason::cancelled: return "cancelled";
    default: return "none";
  }
}

}  // namespace

Session::Session(std::string session_id, StreamSource source, EngineConfig config, BackendSet backends,
                 SessionOptions options)
    : id_(std::move(session_id)),
      source_(std::move(source)),
      config_(std::move(config)),
      log_(std::make_shared<EventLog>(id_, options.canonical)) {
  source_.validate();
  config_.validate();
  if (!options.jsonl_path.empty()) log_->open_jsonl(options.jsonl_path);
  pipeline_ = std::make_unique<Pipeline>(config_, std::move(backends), log_, options.canonical);
}

Session::~Session() {
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = true;
  }
  if (pipeline_) pipeline_->abort();
  if (monitor_.joinable()) monitor_.join();
}

SessionState Session::start() {
  std::unique_lock lock(mutex_);
  if (state_ != SessionState::created)
    throw IllegalTransition("cannot start session " + id_ + " in state " + to_string(state_));
  std::unique_ptr<ChunkProducer> producer;
  IngestOptions ingest = config_.ingest;
  try {
    producer = open_stream(source_, ingest);
  } catch (const std::exception& e) {
    lock.unlock();
    log_->append(EventKind::session_status, 0.0, {{"state", "failed"}, {"reason", e.what()}});
    {
      std::lock_guard relock(mutex_);
      state_ = SessionState::failed;
      failure_ = e.what();
    }
    log_->close();
    changed_.notify_all();
    throw;
  }
  log_->append(EventKind::session_status, 0.0,
               {{"state", "running"},
                {"source", source_.locator},
                {"source_kind", source_.kind == SourceKind::hls_playlist ? "hls_playlist" : "local_file"},
                {"language", config_.language}});
  state_ = SessionState::running;
  pipeline_->start(std::move(producer));
  monitor_ = std::thread([this] { monitor(); });
  return state_;
}

SessionState Session::stop() {
  {
    std::lock_guard lock(mutex_);
    if (state_ != SessionState::running)
      throw IllegalTransition("cannot stop session " + id_ + " in state " + to_string(state_));
    stop_requested_ = true;
  }
  pipeline_->request_stop();
  if (!pipeline_->wait_for(std::chrono::duration<double>(config_.stop_grace))) pipeline_->abort();
  return wait();
}

SessionState Session::wait() {
  std::unique_lock lock(mutex_);
  changed_.wait(lock, [&] { return state_ != SessionState::running && state_ != SessionState::created; });
  return state_;
}

void Session::monitor() {
  pipeline_->join();
  bool stopped;
  {
    std::lock_guard lock(mutex_);
    stopped = stop_requested_;
  }
  switch (pipeline_->outcome()) {
    case PipelineOutcome::failed: finalize(SessionState::failed, pipeline_->failure_reason()); break;
    default: finalize(stopped ? SessionState::stopped : SessionState::finished, ""); break;
  }
}

void Session::finalize(SessionState state, const std::string& reason) {
  double t = pipeline_->metrics().stream_duration;
  auto events = log_->events(log_->last_event_id() ? log_->last_event_id() - 1 : 0);
  if (!events.empty()) t = std::max(t, events.back()->event.stream_time);
  Json payload{{"state", to_string(state)}, {"end_reason", to_string(pipeline_->end_reason())}};
  if (!reason.empty()) payload["reason"] = reason;
  log_->append(EventKind::session_status, t, std::move(payload));
  log_->close();
  {
    std::lock_guard lock(mutex_);
    state_ = state;
    failure_ = reason;
    final_clock_ = t;
  }
  changed_.notify_all();
}

SessionState Session::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

StatsSnapshot Session::stats() const {
  StatsSnapshot s = pipeline_->stats();
  std::lock_guard lock(mutex_);
  s.session_clock = std::max(s.session_clock, final_clock_);
  return s;
}
PipelineMetrics Session::metrics() const { return pipeline_->metrics(); }

std::string Session::failure_reason() const {
  std::lock_guard lock(mutex_);
  return failure_;
}

Json Session::describe() const {
  Json j{{"session_id", id_},
         {"state", to_string(state())},
         {"source", source_.locator},
         {"language", config_.language},
         {"last_event_id", log_->last_event_id()}};
  const std::string why = failure_reason();
  if (!why.empty()) j["reason"] = why;
  return j;
}

SessionManager::SessionManager(BackendFactory factory, std::string default_backends, std::string log_dir)
    : factory_(std::move(factory)), default_backends_(std::move(default_backends)), log_dir_(std::move(log_dir)) {}

std::shared_ptr<Session> SessionManager::create(const StreamSource& source,
                                                const std::map<std::string, std::string>& overrides,
                                                const std::string& backends_spec) {
  EngineConfig config = apply_overrides(EngineConfig{}, overrides);
  const std::string spec = backends_spec.empty() ? default_backends_ : backends_spec;
  if (spec.empty()) throw InvalidConfig("no backends configured");
  BackendSet backends = factory_(spec);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "session-" + std::to_string(next_id_++);
  }
  SessionOptions options;
  if (!log_dir_.empty()) options.jsonl_path = (std::filesystem::path(log_dir_) / (id + ".jsonl")).string();
  auto session = std::make_shared<Session>(id, source, std::move(config), std::move(backends), options);
  std::lock_guard lock(mutex_);
  sessions_[id] = session;
  return session;
}

std::shared_ptr<Session> SessionManager::get(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw UnknownSession("unknown session: " + session_id);
  return it->second;
}

std::vector<std::shared_ptr<Session>> SessionManager::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::shared_ptr<Session>> out;
  for (const auto& [id, s] : sessions_) out.push_back(s);
  return out;
}

}  // namespace streamcheck
