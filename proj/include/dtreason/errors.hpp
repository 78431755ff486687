#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dtreason {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text input that does not follow a grammar. `position` is a 0-based
// character offset into the offending text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : Error(msg + " at position " + std::to_string(position)), position_(position), detail_(msg) {}
  std::size_t position() const { return position_; }
  const std::string& detail() const { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

// Unknown instance, feature, nominal value, tree, or similar name.
class NameError : public Error {
 public:
  using Error::Error;
};

// Structurally invalid input object (tree, schema, data).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Name already registered.
class DuplicateError : public Error {
 public:
  using Error::Error;
};

// Retract of a constraint that was never asserted.
class NoSuchConstraint : public Error {
 public:
  using Error::Error;
};

}  // namespace dtreason
