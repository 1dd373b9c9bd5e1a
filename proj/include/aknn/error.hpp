#pragma once

#include <stdexcept>
#include <string>

namespace aknn {

// All recoverable failures in the library surface as aknn::Error with a
// one-line message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A config file that cannot be read, parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aknn
