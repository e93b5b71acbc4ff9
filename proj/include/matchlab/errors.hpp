#pragma once

#include <stdexcept>
#include <string>

namespace matchlab {

// Base class for all matchlab errors. The CLI maps subclasses to exit codes:
// usage -> 1, data/validation -> 2, internal invariant -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-provided configuration (names the offending field).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (carries a line number where applicable).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally well-formed input that violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad CLI invocation (missing flag, unknown format, empty input set).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite value surfaced where finite arithmetic is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training diverged (non-finite parameters); message names the epoch.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Instance too large for exhaustive search.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A caller bug: assignment past capacity in the no-free-disposal setting.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A robustness audit failed; this is a defect, not a data problem.
class InternalInvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace matchlab
