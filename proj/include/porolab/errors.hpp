#pragma once

#include <stdexcept>
#include <string>

namespace porolab {

// Error taxonomy mirrored by the CLI exit codes:
//   UsageError -> 2, CapacityError -> 3, InternalError -> 4.
// Scientific negatives (no hole found, a trace that is not Cauchy) are report
// fields, never exceptions.

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

struct CapacityError : std::runtime_error {
  double required = 0;
  CapacityError(const std::string& m, double req)
      : std::runtime_error(m), required(req) {}
};

struct RefinementError : UsageError {
  int required_depth = 0;
  RefinementError(const std::string& m, int depth)
      : UsageError(m), required_depth(depth) {}
};

struct DomainError : UsageError {
  explicit DomainError(const std::string& m) : UsageError(m) {}
};

struct InternalError : std::runtime_error {
  explicit InternalError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace porolab
