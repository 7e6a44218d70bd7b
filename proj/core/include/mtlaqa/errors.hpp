#pragma once

#include <stdexcept>
#include <string>

namespace mtlaqa {

/// A caller-supplied value violated an operation's contract (bad shape,
/// out-of-range label, malformed file, unknown config key). Maps to CLI
/// exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss input contained NaN or infinity.
class NonFiniteError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Work started but could not complete (diverged training, I/O failure
/// mid-run). Maps to CLI exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtlaqa
