#pragma once

#include <stdexcept>
#include <string>

namespace zsl {

// Base for every failure the library reports on purpose. The CLI maps these
// to exit code 1; anything else escaping is an internal error (exit 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Caller misuse: bad arguments, empty candidate sets, shape mismatches.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid model or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A name that cannot be resolved (word vectors, classes).
class LookupError : public Error {
 public:
  using Error::Error;
};

// Binary or text file that does not follow its declared layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Optimization produced a non-finite objective.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace zsl
