#pragma once

#include <stdexcept>
#include <string>

namespace tripod {

/// Input outside the domain of a formula (zero denominators, infinite areas).
class ModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical failure: step-size underflow, unexpected complex branch.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double time = 0.0)
      : std::runtime_error(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tripod
