#pragma once

#include <stdexcept>
#include <string>

namespace rankprox {

/// Bad run configuration (unknown keys, invalid values, malformed net specs).
/// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing or malformed on-disk data (images, manifests, checkpoints).
/// The CLI maps this to exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during a run (non-finite loss, divergence).
/// The CLI maps this to exit code 4.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rankprox
