#pragma once

#include <stdexcept>
#include <string>

namespace fpt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, out-of-range parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Argument outside a function's mathematical domain.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

// Root selection had zero density at every candidate.
class DegenerateError : public Error {
public:
    using Error::Error;
};

// A quadrature or series gave up before reaching tolerance. Carries the best
// estimate so callers can decide whether it is good enough.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double estimate, double error)
        : Error(what), estimate_(estimate), error_(error) {}

    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

}  // namespace fpt
