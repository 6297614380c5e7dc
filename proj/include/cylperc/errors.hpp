#pragma once

#include <stdexcept>
#include <string>

namespace cylperc {

// Bad argument or violated precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A query falls outside the region a sample can answer for.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid, memory or representable-range limit exceeded.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cylperc
