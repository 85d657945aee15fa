#pragma once

#include <stdexcept>
#include <string>

namespace spinbus {

/// Bad user input: malformed config, invalid parameter combination.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical engine failure: dimension cap, non-convergence, consistency
/// check tripped.
struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A cross-check between independent computation routes failed.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A merit time series had no detectable peak on the scanned window.
struct NoPeakError : EngineError {
  using EngineError::EngineError;
};

}  // namespace spinbus
