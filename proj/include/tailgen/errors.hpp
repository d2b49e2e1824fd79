#pragma once

#include <stdexcept>
#include <string>

namespace tailgen {

/// Bad input data or configuration. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Text that does not match an expected template or file grammar.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::string offending_text = {}, int line = -1)
      : ValidationError(what), offending_text_(std::move(offending_text)), line_(line) {}

  const std::string& offending_text() const { return offending_text_; }
  int line() const { return line_; }

 private:
  std::string offending_text_;
  int line_;
};

/// Failure talking to a model backend. Retryable errors are transient
/// (rate limit, 5xx, timeout); non-retryable ones abort the request.
/// Maps to CLI exit code 3 once the retry policy is exhausted.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, bool retryable, int status = 0)
      : std::runtime_error(what), retryable_(retryable), status_(status) {}

  bool retryable() const { return retryable_; }
  int status() const { return status_; }

 private:
  bool retryable_;
  int status_;
};

/// Journal or cache content fails its integrity check.
class IntegrityError : public std::runtime_error {
 public:
  explicit IntegrityError(const std::string& what, int line = -1)
      : std::runtime_error(what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace tailgen
