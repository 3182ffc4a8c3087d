#pragma once

#include <stdexcept>
#include <string>

namespace factgauntlet {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Text produced by a model (or read from disk) could not be parsed.
/// Keeps the raw input so callers can log it.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Failure talking to a remote backend (LLM or embedding endpoint).
class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retriable, int status = 0)
      : Error(what), retriable_(retriable), status_(status) {}

  bool retriable() const noexcept { return retriable_; }
  /// HTTP status, or 0 when the request never got a response.
  int status() const noexcept { return status_; }

 private:
  bool retriable_;
  int status_;
};

/// Connection refused, timeouts, 5xx.
class TransportError : public BackendError {
 public:
  explicit TransportError(const std::string& what, int status = 0)
      : BackendError(what, true, status) {}
};

/// HTTP 429.
class RateLimitError : public BackendError {
 public:
  explicit RateLimitError(const std::string& what)
      : BackendError(what, true, 429) {}
};

/// The backend answered, but not with something we can use.
class MalformedReplyError : public BackendError {
 public:
  explicit MalformedReplyError(const std::string& what, int status = 0)
      : BackendError(what, false, status) {}
};

/// The backend answered with an empty completion.
class EmptyResponseError : public BackendError {
 public:
  explicit EmptyResponseError(const std::string& what)
      : BackendError(what, false) {}
};

}  // namespace factgauntlet
