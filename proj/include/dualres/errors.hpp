#pragma once

#include <stdexcept>
#include <string>

namespace dualres {

// Exit-code classes used by the command-line front end:
//   ConfigError    -> 2 (bad input, schema or grid)
//   DomainError    -> 3 (request is outside the physics the model covers)
//   NumericalError -> 4 (integrator / solver did not meet its contract)

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace dualres
