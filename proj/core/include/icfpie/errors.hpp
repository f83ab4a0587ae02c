#pragma once

#include <stdexcept>
#include <string>

namespace icfpie {

// Invalid dimensions, parameters or config values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix could not be inverted even after regularization, or a model
// produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random sensor placement did not yield a connected graph.
class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Entry-selection subsets violate the partition conditions.
class SelectionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace icfpie
