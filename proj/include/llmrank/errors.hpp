#pragma once

#include <stdexcept>
#include <string>

namespace llmrank {

// Input text could not be parsed. line() is 1-based, 0 when not line oriented.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Judge reply did not satisfy the expected JSON schema. Retryable.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure talking to a judge endpoint. Retryable.
class TransportError : public std::runtime_error {
 public:
  enum class Kind { network, status, timeout, protocol };

  TransportError(Kind kind, const std::string& msg, int status = 0)
      : std::runtime_error(msg), kind_(kind), status_(status) {}
  Kind kind() const noexcept { return kind_; }
  int status_code() const noexcept { return status_; }

 private:
  Kind kind_;
  int status_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace llmrank
