#pragma once

#include <stdexcept>
#include <string>

namespace tlsscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonHermitianInput : public Error {
 public:
  using Error::Error;
};

class NoCrossingInRange : public Error {
 public:
  using Error::Error;
};

class BiasLimitExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidBand : public Error {
 public:
  using Error::Error;
};

class DegenerateTrace : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class AmbiguousSigns : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported configuration (bad keys, bad values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or its contents are malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file declares a schema_version this build does not understand.
class SchemaError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace tlsscope
