#pragma once

#include <stdexcept>
#include <string>

namespace dtc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: config files, out-of-range parameters, inconsistent requests.
struct ConfigError : Error {
  using Error::Error;
};

// An iterative solver (Newton minimizer, Lanczos, propagator step control)
// failed to reach its tolerance within its iteration budget.
struct ConvergenceError : Error {
  using Error::Error;
};

// State labeling could not produce an unambiguous bijection.
struct LabelingError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

}  // namespace dtc
