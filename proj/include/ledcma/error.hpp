#pragma once

#include <stdexcept>
#include <string>

namespace ledcma {

/// Invalid user-facing configuration (bad function id, lambda < 4, N < N_eff, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise unusable numerical state.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by a problem when its evaluation budget is used up. Drivers treat it
/// as a termination signal.
class BudgetExhausted : public std::runtime_error {
 public:
  explicit BudgetExhausted(long budget)
      : std::runtime_error("evaluation budget exhausted (" + std::to_string(budget) + ")"),
        budget_(budget) {}
  long budget() const noexcept { return budget_; }

 private:
  long budget_;
};

}  // namespace ledcma
