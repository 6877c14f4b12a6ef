#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace msstop {

/// A parameter value violates a probability, simplex or stochasticity constraint.
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shapes disagree: vector lengths, matrix dimensions, unknown structure terms.
class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of an operation (e.g. N < n).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad caller input that is not a shape problem (non-integral N, outcome out of range).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is 1-based, 0 when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace msstop
