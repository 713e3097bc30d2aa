#pragma once

#include <string>
#include <string_view>

namespace streamcheck::http {

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string target;  // path + query, always starts with '/'

  std::string origin() const;  // scheme://host:port
};

// Throws std::invalid_argument for anything that is not an absolute http(s) URL.
Url parse_url(std::string_view url);

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;
};

// Throws UnreachableSource when no response could be obtained.
Response get(const std::string& url, double timeout_seconds = 10.0);

// POSTs a JSON body and returns the response body. Transport failures and
// timeouts raise BackendTimeout; non-2xx statuses raise BackendError.
std::string post_json(const std::string& url, const std::string& body, double timeout_seconds);

}  // namespace streamcheck::http
