#pragma once

#include <stdexcept>
#include <string>

namespace leadlag {

// Invalid configuration or arguments supplied by the caller.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The input data cannot support the requested computation
// (too short a window, off-lattice timestamps, degenerate samples, ...).
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed.
class invariant_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace leadlag
