#pragma once

#include <stdexcept>
#include <string>

namespace mctrack {

// Base for every error the library raises. Callers that only care about
// "bad input" vs "bug" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Document-level errors raised by the BaseVersion reader.
class MalformedDocument : public Error {
 public:
  using Error::Error;
};

class SchemaViolation : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class DuplicateTrackId : public Error {
 public:
  using Error::Error;
};

class DegenerateBox : public Error {
 public:
  using Error::Error;
};

class NonPositiveDt : public Error {
 public:
  using Error::Error;
};

class NonMonotonicTimestamp : public Error {
 public:
  using Error::Error;
};

class EmptySeries : public Error {
 public:
  using Error::Error;
};

class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

class NoPeaks : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mctrack
