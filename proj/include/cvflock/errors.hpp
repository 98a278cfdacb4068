#pragma once

#include <stdexcept>

namespace cvflock {

// Bad user-supplied configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible tensor / graph dimensions.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Simulation handed or produced an invalid physical state.
struct SimFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite gradients or otherwise corrupted training state.
struct TrainFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cvflock
