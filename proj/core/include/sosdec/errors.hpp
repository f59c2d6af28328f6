#pragma once

#include <stdexcept>
#include <string>

namespace sosdec {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegreeLimitError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Raised when an instance or config is malformed (CLI maps it to exit code 2).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlgorithmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sosdec
