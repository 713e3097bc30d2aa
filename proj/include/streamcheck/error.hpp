#pragma once

#include <stdexcept>
#include <string>

namespace streamcheck {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ingest
class UnreachableSource : public Error {
 public:
  using Error::Error;
};
class UnsupportedCodec : public Error {
 public:
  using Error::Error;
};
class UnsupportedRate : public Error {
 public:
  using Error::Error;
};

// Backends. A timeout is a backend error with a distinct cause.
class BackendError : public Error {
 public:
  using Error::Error;
};
class BackendTimeout : public BackendError {
 public:
  using BackendError::BackendError;
};

// Configuration / fixtures
class InvalidConfig : public Error {
 public:
  using Error::Error;
};
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Sessions
class UnknownSession : public Error {
 public:
  using Error::Error;
};
class IllegalTransition : public Error {
 public:
  using Error::Error;
};

}  // namespace streamcheck
