#pragma once

#include <stdexcept>
#include <string>

namespace rfsynth {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unsupported configuration (unknown tech/link pair, impossible
/// impairment parameters, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data violates a precondition (buffer too short, image not
/// divisible by the patch size, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

class RegistryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage was invoked before its upstream artifacts exist.
class StageError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling exhausted its budget. `constraint()` names the
/// constraint that rejected the most candidates.
class RejectionError : public Error {
 public:
  RejectionError(const std::string& constraint, int attempts)
      : Error("rejection sampling gave up after " + std::to_string(attempts) +
              " attempts; most violated constraint: " + constraint),
        constraint_(constraint),
        attempts_(attempts) {}

  const std::string& constraint() const { return constraint_; }
  int attempts() const { return attempts_; }

 private:
  std::string constraint_;
  int attempts_;
};

}  // namespace rfsynth
