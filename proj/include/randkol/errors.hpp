#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace randkol {

// A value outside its documented domain: letters below 1 or above 255,
// probabilities outside their required interval, malformed parameters.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A closed form queried below its validity threshold. The enumeration
// oracle remains available in that regime.
class OutOfRangeError : public DomainError {
public:
  using DomainError::DomainError;
};

// Work or memory beyond the configured caps: enumeration width above 24,
// pending-queue growth past its byte budget, or failed file output.
class ResourceLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Source-descriptor syntax error; carries the byte offset of the first
// offending character.
class ParseError : public DomainError {
public:
  ParseError(const std::string& message, std::size_t position)
      : DomainError(message + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

}  // namespace randkol
