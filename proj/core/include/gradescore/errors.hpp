#pragma once

#include <stdexcept>
#include <string>

namespace gradescore {

/// Base class for all harness failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user-supplied configuration (CLI maps this to exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading inputs or writing reports.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Judge reply that carries no usable selection. The runner may retry.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// HTTP-level failure talking to a remote judge. status() == 0 means the
/// request never produced a response (connect failure, timeout, ...).
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int status)
      : Error(message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_ = 0;
};

}  // namespace gradescore
