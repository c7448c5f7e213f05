#pragma once

#include <stdexcept>
#include <string>

namespace pcvc {

// File or stream could not be parsed (PLY header, MV text file, ...).
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input values violate a documented precondition.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Object is in the wrong state for the requested operation
// (e.g. color conversion applied to the wrong color space).
class StateError : public std::runtime_error {
public:
  explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

// A bitstream failed a structural or consistency check while decoding.
class CorruptionError : public std::runtime_error {
public:
  explicit CorruptionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcvc
