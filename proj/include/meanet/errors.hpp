#pragma once

#include <stdexcept>
#include <string>

namespace meanet {

// Bad or contradictory configuration (unknown keys, invalid values).
// The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data (files, dimensions, ranges).
// The CLI maps this to exit code 3.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (non-finite values where finite ones are required,
// factorization breakdown). The CLI maps this to exit code 4.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace meanet
