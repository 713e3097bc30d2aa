#include "streamcheck/http_util.hpp"

#include <httplib.h>

#include <stdexcept>

#include "streamcheck/error.hpp"

namespace streamcheck::http {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(std::string_view url) {
  Url out;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw std::invalid_argument("not an absolute URL: " + std::string(url));
  out.scheme = std::string(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    throw std::invalid_argument("unsupported URL scheme: " + out.scheme);
  }
  out.port = out.scheme == "https" ? 443 : 80;
  auto rest = url.substr(scheme_end + 3);
  const auto slash = rest.find_first_of("/?");
  auto authority = rest.substr(0, slash);
  out.target = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (!out.target.empty() && out.target[0] == '?') out.target = "/" + out.target;
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    out.host = std::string(authority.substr(0, colon));
    out.port = std::stoi(std::string(authority.substr(colon + 1)));
  } else {
    out.host = std::string(authority);
  }
  if (out.host.empty()) throw std::invalid_argument("URL has no host: " + std::string(url));
  return out;
}

namespace {

httplib::Client make_client(const Url& u, double timeout_seconds) {
  httplib::Client cli(u.scheme + "://" + u.host + ":" + std::to_string(u.port));
  const auto sec = static_cast<time_t>(timeout_seconds);
  const auto usec = static_cast<time_t>((timeout_seconds - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
  return cli;
}

}  // namespace

Response get(const std::string& url, double timeout_seconds) {
  Url u;
  try {
    u = parse_url(url);
  } catch (const std::exception& e) {
    throw UnreachableSource(e.what());
  }
  auto cli = make_client(u, timeout_seconds);
  auto res = cli.Get(u.target);
  if (!res) throw UnreachableSource("GET " + url + " failed: " + httplib::to_string(res.error()));
  Response out;
  out.status = res->status;
  out.body = std::move(res->body);
  out.content_type = res->get_header_value("Content-Type");
  return out;
}

std::string post_json(const std::string& url, const std::string& body, double timeout_seconds) {
  Url u;
  try {
    u = parse_url(url);
  } catch (const std::exception& e) {
    throw BackendError(e.what());
  }
  auto cli = make_client(u, timeout_seconds);
  auto res = cli.Post(u.target, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what = "POST " + url + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw BackendTimeout(what);
    }
    throw BackendError(what);
  }
  if (res->status == 504) throw BackendTimeout("POST " + url + " returned 504");
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("POST " + url + " returned " + std::to_string(res->status));
  }
  return res->body;
}

}  // namespace streamcheck::http
