#pragma once

#include <stdexcept>
#include <string>

namespace lsbeta {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, ids, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or violated precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise unusable numerical result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace lsbeta
