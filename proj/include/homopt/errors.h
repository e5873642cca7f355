#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace homopt {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position()` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error("parse error at " + std::to_string(position) + ": " + message),
        position_(position),
        message_(message) {}

  std::size_t position() const { return position_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

/// Numerical evaluation failed (division by zero, bad power, unbound
/// variable, evaluation at a point where a field is undefined).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of an operation does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised by the synthesis pipeline; carries the failing stage name.
class SynthesisError : public Error {
 public:
  SynthesisError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace homopt
