#pragma once

#include <stdexcept>
#include <string>

namespace gsest {

// An iterative solver failed to converge or could not bracket a root.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rejection sampling for a conditioned scenario found the conditioning
// event too rare to continue.
class StarvationError : public std::runtime_error {
 public:
  explicit StarvationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gsest
