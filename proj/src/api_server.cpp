#include "streamcheck/api_server.hpp"

#include <sys/socket.h>

#include <charconv>
#include <list>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "streamcheck/error.hpp"

namespace streamcheck {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

std::string_view target_of(const Request& req) {
  const auto t = req.target();
  return {t.data(), t.size()};
}

Response make_response(const Request& req, http::status status, const Json& body) {
  Response res{status, req.version()};
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump() + "\n";
  res.prepare_payload();
  return res;
}

Response error_response(const Request& req, http::status status, const std::string& kind, const std::string& what) {
  return make_response(req, status, Json{{"error", kind}, {"message", what}});
}

std::vector<std::string> split_path(std::string_view target) {
  const auto q = target.find('?');
  std::string_view path = target.substr(0, q);
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto j = path.find('/', i);
    parts.emplace_back(path.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j;
  }
  return parts;
}

std::string query_param(std::string_view target, std::string_view name) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return "";
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (pair.substr(0, eq) == name) return std::string(eq == std::string_view::npos ? "" : pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return "";
}

// Config values may arrive as JSON strings, numbers or booleans.
std::string config_value(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number() || v.is_null()) return v.dump();
  throw InvalidConfig("config values must be scalars");
}

Json stats_body(const Session& s) {
  Json j = s.stats().to_json();
  j["session_id"] = s.id();
  j["state"] = to_string(s.state());
  return j;
}

}  // namespace

struct ApiServer::Impl {
  explicit Impl(SessionManager& m) : manager(m) {}

  SessionManager& manager;
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};

  std::mutex conn_mutex;
  std::list<std::thread> connections;
  std::set<int> open_fds;

  void accept_loop() {
    while (!stopping) {
      tcp::socket socket(io);
      beast::error_code ec;
      acceptor->accept(socket, ec);
      if (ec) {
        if (stopping) break;
        continue;
      }
      std::lock_guard lock(conn_mutex);
      open_fds.insert(socket.native_handle());
      connections.emplace_back([this, s = std::move(socket)]() mutable { serve(std::move(s)); });
    }
  }

  void forget(int fd) {
    std::lock_guard lock(conn_mutex);
    open_fds.erase(fd);
  }

  void serve(tcp::socket socket) {
    const int fd = socket.native_handle();
    beast::flat_buffer buffer;
    beast::error_code ec;
    while (!stopping) {
      Request req;
      http::read(socket, buffer, req, ec);
      if (ec) break;
      if (websocket::is_upgrade(req)) {
        serve_events(std::move(socket), std::move(req), fd);
        return;
      }
      Response res = handle(req);
      http::write(socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    socket.shutdown(tcp::socket::shutdown_send, ec);
    forget(fd);
  }

  Response handle(const Request& req) {
    const auto parts = split_path(target_of(req));
    try {
      if (req.method() == http::verb::options) {
        Response res{http::status::no_content, req.version()};
        res.set(http::field::access_control_allow_origin, "*");
        res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
        res.keep_alive(req.keep_alive());
        res.prepare_payload();
        return res;
      }
      if (parts.empty() || parts[0] != "sessions") return error_response(req, http::status::not_found, "NotFound", "no such route");
      if (parts.size() == 1) {
        if (req.method() == http::verb::get) {
          Json list = Json::array();
          for (const auto& s : manager.list()) list.push_back(s->describe());
          return make_response(req, http::status::ok, Json{{"sessions", list}});
        }
        if (req.method() == http::verb::post) return create(req);
      } else {
        auto session = manager.get(parts[1]);
        if (parts.size() == 2 && req.method() == http::verb::get)
          return make_response(req, http::status::ok, session->describe());
        if (parts.size() == 3 && parts[2] == "stats" && req.method() == http::verb::get)
          return make_response(req, http::status::ok, stats_body(*session));
        if (parts.size() == 3 && parts[2] == "start" && req.method() == http::verb::post) {
          session->start();
          return make_response(req, http::status::ok, session->describe());
        }
        if (parts.size() == 3 && parts[2] == "stop" && req.method() == http::verb::post) {
          session->stop();
          return make_response(req, http::status::ok, session->describe());
        }
        if (parts.size() == 3 && parts[2] == "events")
          return error_response(req, http::status::upgrade_required, "UpgradeRequired", "events are served over WebSocket");
      }
      return error_response(req, http::status::method_not_allowed, "MethodNotAllowed", "unsupported method for route");
    } catch (const UnknownSession& e) {
      return error_response(req, http::status::not_found, "UnknownSession", e.what());
    } catch (const IllegalTransition& e) {
      return error_response(req, http::status::conflict, "IllegalTransition", e.what());
    } catch (const InvalidConfig& e) {
      return error_response(req, http::status::bad_request, "InvalidConfig", e.what());
    } catch (const SchemaViolation& e) {
      return error_response(req, http::status::bad_request, "SchemaViolation", e.what());
    } catch (const UnreachableSource& e) {
      return error_response(req, http::status::unprocessable_entity, "UnreachableSource", e.what());
    } catch (const UnsupportedCodec& e) {
      return error_response(req, http::status::unprocessable_entity, "UnsupportedCodec", e.what());
    } catch (const std::exception& e) {
      return error_response(req, http::status::internal_server_error, "Error", e.what());
    }
  }

  Response create(const Request& req) {
    Json body;
    try {
      body = Json::parse(req.body());
    } catch (const Json::exception& e) {
      throw InvalidConfig(std::string("request body is not JSON: ") + e.what());
    }
    if (!body.is_object() || !body.contains("source") || !body.at("source").is_string())
      throw InvalidConfig("request needs a string \"source\"");
    std::map<std::string, std::string> overrides;
    if (body.contains("config")) {
      if (!body.at("config").is_object()) throw InvalidConfig("\"config\" must be an object");
      for (const auto& [k, v] : body.at("config").items()) overrides[k] = config_value(v);
    }
    const std::string language = body.value("language", std::string("en"));
    overrides.emplace("language", language);
    const std::string backends = body.value("backends", std::string());
    auto session = manager.create(StreamSource::from_locator(body.at("source").get<std::string>(), language),
                                  overrides, backends);
    return make_response(req, http::status::created, session->describe());
  }

  // Forgets fd while the socket still owns it, so stop() never shuts down a
  // recycled descriptor.
  void serve_events(tcp::socket socket, Request req, int fd) {
    struct Forget {
      Impl* self;
      int fd;
      ~Forget() { self->forget(fd); }
    };
    const auto parts = split_path(target_of(req));
    std::shared_ptr<Session> session;
    std::uint64_t from = 0;
    std::optional<Forget> guard;
    beast::error_code ec;
    try {
      if (parts.size() != 3 || parts[0] != "sessions" || parts[2] != "events")
        throw UnknownSession("no event feed at this path");
      session = manager.get(parts[1]);
      const std::string f = query_param(target_of(req), "from");
      if (!f.empty()) {
        auto [p, err] = std::from_chars(f.data(), f.data() + f.size(), from);
        if (err != std::errc() || p != f.data() + f.size()) throw InvalidConfig("from must be a non-negative integer");
      }
    } catch (const UnknownSession& e) {
      auto res = error_response(req, http::status::not_found, "UnknownSession", e.what());
      res.keep_alive(false);
      http::write(socket, res, ec);
      forget(fd);
      return;
    } catch (const InvalidConfig& e) {
      auto res = error_response(req, http::status::bad_request, "InvalidConfig", e.what());
      res.keep_alive(false);
      http::write(socket, res, ec);
      forget(fd);
      return;
    }

    websocket::stream<tcp::socket> ws(std::move(socket));
    guard.emplace(this, fd);
    ws.set_option(websocket::stream_base::decorator([](websocket::response_type& res) {
      res.set(http::field::access_control_allow_origin, "*");
    }));
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    // Keep the log alive for as long as the subscription reads from it.
    auto log = session->log();
    auto sub = log->subscribe(from);
    while (!stopping) {
      auto item = sub->next(std::chrono::milliseconds(100));
      if (item) {
        ws.write(asio::buffer((*item)->line), ec);
        if (ec) break;
        continue;
      }
      if (sub->disconnected()) {
        ws.close(websocket::close_reason(websocket::close_code::policy_error, "subscriber queue overflow"), ec);
        break;
      }
      if (sub->finished()) {
        ws.close(websocket::close_code::normal, ec);
        break;
      }
    }
    sub->cancel();
    if (stopping) ws.close(websocket::close_code::going_away, ec);
  }
};

ApiServer::ApiServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  auto endpoint = tcp::endpoint(asio::ip::make_address(host), static_cast<unsigned short>(port));
  impl_->acceptor = std::make_unique<tcp::acceptor>(impl_->io);
  impl_->acceptor->open(endpoint.protocol());
  impl_->acceptor->set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor->bind(endpoint);
  impl_->acceptor->listen();
  port_ = impl_->acceptor->local_endpoint().port();
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  spdlog::info("api listening on {}:{}", host, port_);
  return port_;
}

void ApiServer::stop() {
  if (!impl_->acceptor || impl_->stopping.exchange(true)) return;
  // Unblock the accept call and every blocking read without touching the
  // sockets' asio state from this thread.
  ::shutdown(impl_->acceptor->native_handle(), SHUT_RDWR);
  {
    std::lock_guard lock(impl_->conn_mutex);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
  }
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::list<std::thread> threads;
  {
    std::lock_guard lock(impl_->conn_mutex);
    threads.swap(impl_->connections);
  }
  for (auto& t : threads) t.join();
  beast::error_code ec;
  impl_->acceptor->close(ec);
}

}  // namespace streamcheck
