#pragma once

#include <stdexcept>
#include <string>

namespace roweisposes {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix/vector size violations (empty input, mismatched dimensions).
class InvalidDimensionError : public Error {
 public:
  using Error::Error;
};

// The constraint matrix of a pencil is not positive definite. Carries the
// smallest pivot encountered while factorizing it.
class IndefiniteConstraintError : public Error {
 public:
  IndefiniteConstraintError(const std::string& msg, double smallest_pivot)
      : Error(msg), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

// Input does not match the declared dataset schema (bad joint indices,
// unknown labels, manifest inconsistencies).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Shoulder landmarks coincide in the horizontal plane; the aligning
// rotation is undefined.
class DegenerateOrientationError : public Error {
 public:
  using Error::Error;
};

// Skeleton has no usable scale reference.
class DegenerateSkeletonError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or parameter value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Semantically invalid data (symbols outside an alphabet, empty corpora).
class DataError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Violation of the evaluation protocol (missing annotations, too few
// subjects for cross validation).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Model fitting failed after all recovery attempts.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace roweisposes
