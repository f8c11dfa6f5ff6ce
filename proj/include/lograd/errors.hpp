#pragma once

#include <stdexcept>
#include <string>

namespace lograd {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or lengths that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Non-finite values, failed factorizations, diverged training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed run configuration or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or dataset container that cannot be read back.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lograd
