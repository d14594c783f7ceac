#pragma once

#include <stdexcept>
#include <string>

namespace nadpcm {

// File and bitstream problems: unreadable paths, malformed containers,
// truncated or inconsistent encoded streams.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or argument combinations.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical breakdown (singular systems, non-finite values).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nadpcm
