#pragma once

#include <stdexcept>
#include <string>

namespace switchcell {

/// Bad input: config, CLI arguments, parameter invariants. Maps to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a model function (also a validation problem).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The math did not work out: unsolvable stage plan, diverging solver, failed fit.
/// Maps to exit code 2.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FitError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace switchcell
