#pragma once

#include <stdexcept>
#include <string>

namespace ltg {

// Every failure raised by the library derives from Error. The CLI maps
// InputError subclasses to exit status 1 and NumericalError to status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public InputError {
 public:
  using InputError::InputError;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

// Incompatible shapes between objects that are combined (kernel vs field).
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UndefinedVisibilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

template <typename E>
inline void require(bool condition, const std::string& message) {
  if (!condition) throw E(message);
}

}  // namespace detail
}  // namespace ltg
