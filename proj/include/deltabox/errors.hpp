#pragma once

#include <stdexcept>
#include <string>

namespace deltabox {

/// Argument outside the box [-pi, pi] or otherwise outside a function's domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent input (bad grid, wrong sector, incompatible state).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation at (or numerically on top of) a resolvent pole.
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A marching step whose scalar linear solve has a vanishing denominator.
class StepSingularityError : public SingularityError {
public:
    StepSingularityError(const std::string& what, double t)
        : SingularityError(what), t_(t) {}

    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Moment solver asked for a horizon that is not a multiple of 8*pi.
class UnsupportedHorizonError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace deltabox
