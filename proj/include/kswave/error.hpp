#pragma once

#include <stdexcept>
#include <string>

namespace kswave {

/// Invalid input: bad parameters, malformed config, violated preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical fault: blow-up, zero pivot, non-monotone eigenvalue sweep, etc.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kswave
