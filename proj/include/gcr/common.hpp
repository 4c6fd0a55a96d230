#pragma once

#include <stdexcept>
#include <string>

namespace gcr {

/// Base error for all library failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Recoverable per-sample solver failure ("degenerate sample",
/// "cheirality failure"). RANSAC catches these and skips the iteration.
class SolveError : public Error {
 public:
  explicit SolveError(const std::string& what) : Error(what) {}
};

}  // namespace gcr
