#pragma once

#include <stdexcept>
#include <string>

namespace rirkit {

// Exit-code mapping used by the CLI: InvalidInput -> 2, PreconditionError -> 3,
// VerificationError / NumericalError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-domain input: improper TF, pole on the unit circle, ...
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Input is well-formed but the requested analysis does not apply to it.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A post-hoc certificate did not verify.
class VerificationError : public Error {
 public:
  using Error::Error;
};

// Iterations failed to converge or a degenerate configuration was met.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rirkit
