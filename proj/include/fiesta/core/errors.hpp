#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace fiesta {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite score, malformed file or argument outside its domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A posterior was requested for a model with fewer than three evaluations.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

class BudgetTooSmall : public Error {
 public:
  using Error::Error;
};

class UndefinedComplexity : public Error {
 public:
  using Error::Error;
};

class PoolExhausted : public Error {
 public:
  using Error::Error;
};

// The evaluator (or the process behind it) could not produce a score.
// `request` is set when the failure is attributable to one request.
class EvaluatorFailure : public Error {
 public:
  explicit EvaluatorFailure(const std::string& what,
                            std::optional<std::uint64_t> request = std::nullopt)
      : Error(what), request_(request) {}

  std::optional<std::uint64_t> request() const { return request_; }

 private:
  std::optional<std::uint64_t> request_;
};

// The evaluator child violated the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fiesta
