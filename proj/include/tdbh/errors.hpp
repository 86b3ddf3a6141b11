#pragma once

#include <stdexcept>
#include <string>

namespace tdbh {

/// Invalid run configuration or lattice specification.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Requested basis exceeds the configured dimension cap.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Solver breakdown: non-convergence, step underflow, corrupted state.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Wannier gauge fixing could not be resolved (degenerate band edge,
/// vanishing reference overlap).
struct GaugeError : std::runtime_error {
  explicit GaugeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A conservation-law monitor exceeded its threshold.
struct ConservationError : std::runtime_error {
  explicit ConservationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tdbh
