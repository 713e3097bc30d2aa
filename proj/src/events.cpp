#include "streamcheck/events.hpp"

#include <chrono>
#include <thread>

#include "streamcheck/error.hpp"

namespace streamcheck {

namespace {

constexpr const char* kKindNames[] = {"transcript",     "timeline",       "claim_detected", "evidence_ready",
                                      "verdict",        "stats_snapshot", "session_status", "dropped_audio"};

template <typename T>
T field(const Json& j, const char* name) {
  if (!j.contains(name)) throw SchemaViolation(name, std::string("event is missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const Json::exception&) {
    throw SchemaViolation(name, std::string("event field '") + name + "' has the wrong type");
  }
}

}  // namespace

double wall_clock_now() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

std::string to_string(EventKind kind) { return kKindNames[static_cast<int>(kind)]; }

EventKind event_kind_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i)
    if (name == kKindNames[i]) return static_cast<EventKind>(i);
  throw SchemaViolation("kind", "unknown event kind '" + name + "'");
}

std::string SessionEvent::to_line() const {
  nlohmann::ordered_json j;
  j["event_id"] = event_id;
  j["session_id"] = session_id;
  j["stream_time"] = stream_time;
  j["wall_time"] = wall_time;
  j["kind"] = to_string(kind);
  j["payload"] = payload;
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

SessionEvent SessionEvent::from_line(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw SchemaViolation("", std::string("event line is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaViolation("", "event line is not a JSON object");
  SessionEvent ev;
  ev.event_id = field<std::uint64_t>(j, "event_id");
  ev.session_id = field<std::string>(j, "session_id");
  ev.stream_time = field<double>(j, "stream_time");
  ev.wall_time = field<double>(j, "wall_time");
  ev.kind = event_kind_from_string(field<std::string>(j, "kind"));
  if (!j.contains("payload")) throw SchemaViolation("payload", "event is missing field 'payload'");
  ev.payload = j.at("payload");
  return ev;
}

std::optional<PublishedPtr> Subscription::next(std::chrono::milliseconds timeout) {
  if (cancelled_) return std::nullopt;
  if (cursor_ < replay_to_) {
    ++cursor_;
    return log_->at(cursor_);
  }
  auto item = live_.pop_for(timeout);
  if (item) cursor_ = (*item)->event.event_id;
  return item;
}

bool Subscription::finished() const {
  return cancelled_ || (cursor_ >= replay_to_ && live_.closed() && live_.size() == 0);
}

void Subscription::cancel() {
  cancelled_ = true;
  live_.close();
}

EventLog::EventLog(std::string session_id, bool canonical)
    : session_id_(std::move(session_id)), canonical_(canonical) {}

EventLog::~EventLog() { close(); }

void EventLog::open_jsonl(const std::string& path) {
  std::lock_guard lock(mutex_);
  jsonl_.open(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!jsonl_) throw InvalidConfig("cannot open event log file: " + path);
  for (const auto& e : events_) jsonl_ << e->line << '\n';
  jsonl_.flush();
}

PublishedPtr EventLog::append(EventKind kind, double stream_time, Json payload) {
  std::lock_guard lock(mutex_);
  if (closed_) throw Error("event log of session " + session_id_ + " is closed");
  auto published = std::make_shared<PublishedEvent>();
  auto& ev = published->event;
  ev.event_id = events_.size() + 1;
  ev.session_id = session_id_;
  ev.stream_time = stream_time;
  ev.wall_time = canonical_ ? 0.0 : wall_clock_now();
  ev.kind = kind;
  ev.payload = std::move(payload);
  published->line = ev.to_line();
  PublishedPtr ptr = published;
  events_.push_back(ptr);
  if (jsonl_.is_open()) {
    jsonl_ << ptr->line << '\n';
    jsonl_.flush();
  }
  for (auto it = subscribers_.begin(); it != subscribers_.end();) {
    auto sub = it->lock();
    if (!sub || sub->cancelled_) {
      it = subscribers_.erase(it);
      continue;
    }
    if (!sub->live_.try_push(ptr)) {
      sub->overflowed_ = true;
      sub->live_.close();
      it = subscribers_.erase(it);
      continue;
    }
    ++it;
  }
  return ptr;
}

void EventLog::close() {
  std::lock_guard lock(mutex_);
  if (closed_) return;
  closed_ = true;
  for (auto& w : subscribers_)
    if (auto sub = w.lock()) sub->live_.close();
  subscribers_.clear();
  if (jsonl_.is_open()) jsonl_.close();
}

std::shared_ptr<Subscription> EventLog::subscribe(std::uint64_t from_event_id) {
  std::lock_guard lock(mutex_);
  const std::uint64_t last = events_.size();
  const std::uint64_t from = std::min<std::uint64_t>(from_event_id, last);
  std::shared_ptr<Subscription> sub(new Subscription(this, from, last));
  if (closed_) {
    sub->live_.close();
  } else {
    subscribers_.push_back(sub);
  }
  return sub;
}

std::vector<PublishedPtr> EventLog::events(std::uint64_t from_event_id) const {
  std::lock_guard lock(mutex_);
  if (from_event_id >= events_.size()) return {};
  return {events_.begin() + static_cast<std::ptrdiff_t>(from_event_id), events_.end()};
}

std::uint64_t EventLog::last_event_id() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

bool EventLog::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

PublishedPtr EventLog::at(std::uint64_t event_id) const {
  std::lock_guard lock(mutex_);
  return events_.at(event_id - 1);
}

}  // namespace streamcheck
