#pragma once

#include <stdexcept>
#include <string>

namespace mpsqd {

// Error taxonomy maps onto CLI exit codes:
//   InputError (and subclasses)  -> 2
//   ConvergenceError             -> 3
//   PlanError                    -> 4
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures always carry a 1-based line number.
struct ParseError : InputError {
  ParseError(int line_number, const std::string& msg)
      : InputError("line " + std::to_string(line_number) + ": " + msg),
        line(line_number) {}
  int line;
};

// Refusal to enumerate a basis beyond the supported size.
struct CapacityError : InputError {
  explicit CapacityError(const std::string& msg) : InputError(msg) {}
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, double residual)
      : std::runtime_error(msg), best_residual(residual) {}
  double best_residual;
};

// Layout planning and plan consistency failures.
struct PlanError : std::runtime_error {
  explicit PlanError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mpsqd
