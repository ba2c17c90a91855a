#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace allpay {

// Requested derivative does not exist at the evaluation point (tabulated-grid
// kink or a saturation boundary).
class NonDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The Monte Carlo belief-integration path was selected without a seed.
class SeedRequiredError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation hit a point where its defining formula is singular
// (zero total cost in the difficulty weights, zero minimum cost in the
// feasibility quadratic).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario-file validation failure; carries the dotted field path.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace allpay
