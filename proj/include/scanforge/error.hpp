#pragma once

#include <stdexcept>
#include <string>

namespace scanforge {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInputError : public Error {
 public:
  EmptyInputError() : Error("scan input is empty") {}
};

/// Width is not accepted by an algorithm (non-power-of-two without padding,
/// p > n, p == 0, ...).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed prefix network; names the offending step and node.
class NetworkError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when a worker in the distributed runtime fails or a receive times out.
class WorkerError : public Error {
 public:
  using Error::Error;
};

/// Simulator could not make progress (a receive that can never be satisfied).
class DeadlockError : public Error {
 public:
  using Error::Error;
};

/// Image with zero standard deviation handed to NCC.
class DegenerateImageError : public Error {
 public:
  using Error::Error;
};

/// Registration failure, e.g. inconsistent frame indices in a series deformation.
class RegistrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace scanforge
