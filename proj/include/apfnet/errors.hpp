#pragma once

#include <stdexcept>
#include <string>

namespace apfnet {

// Malformed or out-of-contract input (files, indices, configuration).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN or infinity showed up where a finite number is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace apfnet
