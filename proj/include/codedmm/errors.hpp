#pragma once

#include <stdexcept>
#include <string>

namespace codedmm {

// Bad user input: parameter constraints, malformed files, unsupported modes.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A square system had no unique solution.
class SingularMatrix : public std::runtime_error {
 public:
  explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant failed. Data made it through validation but the
// pipeline produced something inconsistent; always a bug, never user error.
class InternalCheckFailure : public std::logic_error {
 public:
  explicit InternalCheckFailure(const std::string& what) : std::logic_error(what) {}
};

}  // namespace codedmm
