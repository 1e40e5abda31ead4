#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dissip {

// Error families map onto CLI exit codes: ValidationError -> 2,
// BudgetExceededError -> 3, NumericalError -> 4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceededError : std::runtime_error {
    BudgetExceededError(const std::string& msg, double requested_samples)
        : std::runtime_error(msg), requested(requested_samples) {}
    double requested;  // K, possibly too large for any integer type
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridMismatchError : ValidationError {
    using ValidationError::ValidationError;
};

struct RangeError : ValidationError {
    using ValidationError::ValidationError;
};

struct DimensionError : ValidationError {
    using ValidationError::ValidationError;
};

struct ResolutionError : ValidationError {
    using ValidationError::ValidationError;
};

struct InfeasibleSpaceError : ValidationError {
    using ValidationError::ValidationError;
};

struct DivergenceError : NumericalError {
    DivergenceError(const std::string& msg, Eigen::Index bad_index)
        : NumericalError(msg), first_bad_index(bad_index) {}
    Eigen::Index first_bad_index;
};

struct NoDataError : NumericalError {
    using NumericalError::NumericalError;
};

struct DegenerateDataError : NumericalError {
    using NumericalError::NumericalError;
};

struct ConvergenceError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace dissip
