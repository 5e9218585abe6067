#pragma once

#include <stdexcept>
#include <string>

namespace scifactor {

// Bad input data: malformed files, duplicate ids, degenerate datasets.
// The CLI maps this family to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid options or arguments supplied by the caller (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A mathematical primitive was called outside its domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace scifactor
