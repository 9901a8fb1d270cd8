#pragma once

#include <stdexcept>
#include <string>

namespace afc {

/// Raised when an input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by iterative searches that exhaust their iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable configuration file.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace afc
