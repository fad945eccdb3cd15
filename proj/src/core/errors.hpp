#pragma once

#include <stdexcept>
#include <string>

namespace misq {

// Validation failures: bad records, bad config, contract violations.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string &msg) : std::runtime_error(msg) {}
};

// Transport / backend failures (retries exhausted, auth, schema mismatch).
class BackendError : public std::runtime_error {
  public:
    explicit BackendError(const std::string &msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace misq
