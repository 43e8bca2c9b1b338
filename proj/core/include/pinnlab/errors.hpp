#pragma once

#include <stdexcept>
#include <string>

namespace pinnlab {

// Invalid dimensions, unknown enum values, malformed configs.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// API misuse (backward on an empty tape, mismatched call order).
struct UsageError : std::logic_error {
    explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Solver or optimizer left its valid state (non-finite loss, u outside [0,1]).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File I/O and checkpoint parse failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pinnlab
