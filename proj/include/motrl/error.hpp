#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace motrl {

// Bad caller-supplied data: malformed files, schema violations, bad arguments.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Line-oriented parse failure; the line number is 1-based.
class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A record field is unknown, missing, or carries an invalid value.
class SchemaError : public InputError {
 public:
  SchemaError(std::string field, const std::string& what)
      : InputError("field '" + field + "': " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An internal consistency check failed; never caused by user input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace motrl
