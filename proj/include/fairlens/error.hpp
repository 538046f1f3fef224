#pragma once

#include <stdexcept>
#include <string>

namespace fairlens {

/// Base class for every error the library raises. The CLI maps all of these
/// to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: unreadable files, unparsable cells, schema mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An operation was called with arguments that violate its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The request is valid but exceeds what this version supports.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairlens
