#pragma once

#include <stdexcept>
#include <string>

namespace codedmm {

// Operand shapes do not line up.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A documented precondition of an operation does not hold. The message names
// the failed constraint.
class PreconditionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Decoded data contradicts itself (e.g. a redundant equation disagrees with the
// values recovered from the others).
class IntegrityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Not enough worker outputs to reconstruct the product.
class InsufficientResults : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Text input (catalog, scenario config, CSV) is malformed.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace codedmm
