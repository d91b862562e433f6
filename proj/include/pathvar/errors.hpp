#pragma once

#include <stdexcept>

namespace pathvar {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed or inconsistent shapes
struct DimensionError : Error {
  using Error::Error;
};

// violated operation precondition (signed weights, caps, empty covers, ...)
struct PreconditionError : Error {
  using Error::Error;
};

// mathematically undefined request (degenerate net, Fano bound out of domain)
struct MathDomainError : Error {
  using Error::Error;
};

// filesystem problems, kept separate for CLI exit codes
struct IoError : Error {
  using Error::Error;
};

}  // namespace pathvar
