#pragma once

#include <stdexcept>
#include <string>

namespace dia {

/// Raised when a solver or simulator detects a numerically invalid state
/// (non-dominant assembly, loss of monotonicity, non-finite accumulation).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid configuration values. Carries the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& message)
        : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace dia
