#pragma once

#include <stdexcept>
#include <string>

namespace recsharpe {

// Bad arguments or malformed input data.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that cannot produce a meaningful number (non-invertible
// series, zero variance, failed convergence).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Corrupt, truncated or incompatible files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Requested work exceeds the configured budget.
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace recsharpe
