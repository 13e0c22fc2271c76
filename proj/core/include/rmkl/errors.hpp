#pragma once

#include <stdexcept>
#include <string>

namespace rmkl {

/// Raised when numerical preconditions fail: non-finite data, indefinite
/// covariance, factorization breakdown, violated operator bounds.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed configuration, file input, or expression text.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rmkl
