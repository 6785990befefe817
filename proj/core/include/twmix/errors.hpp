#pragma once

#include <stdexcept>

namespace twmix {

// Invalid or inconsistent user input: config files, CLI arguments.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or violated numerical preconditions during a run.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corrupt, truncated, or mismatched ensemble snapshot data.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}
