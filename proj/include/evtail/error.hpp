#pragma once

#include <stdexcept>
#include <string>

namespace evtail {

// Caller passed something outside an operation's contract.
class InvalidArgument : public std::invalid_argument {
 public:
  explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

// Not enough samples (or excesses, clusters, ...) to run the requested estimate.
class InsufficientData : public std::runtime_error {
 public:
  explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

// An optimizer or solver failed to produce a usable estimate.  The message
// carries the best diagnostics available at the point of failure.
class EstimationFailure : public std::runtime_error {
 public:
  explicit EstimationFailure(const std::string& what) : std::runtime_error(what) {}
};

// Malformed external input (CSV rows, config values).  Message names the location.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem operation failed (open, write, rename).  Message names the path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evtail
