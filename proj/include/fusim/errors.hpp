#pragma once

#include <stdexcept>
#include <string>

namespace fusim {

// Raised for malformed inputs: bad manifests, shape mismatches, broken
// invariants on user-supplied data. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation fails numerically (divergence, failed
// consistency ratio, no usable rows). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fusim
