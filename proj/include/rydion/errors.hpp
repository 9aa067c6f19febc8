#pragma once

#include <stdexcept>
#include <string>

namespace rydion {

/// Invalid configuration or precondition violation (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure at runtime, e.g. norm drift or step-size underflow
/// (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rydion
