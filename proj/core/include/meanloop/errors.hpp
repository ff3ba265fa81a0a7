#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace meanloop {

/// Bad argument shape or value (dimension mismatch, empty factor list, ...).
class InvalidArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation requested outside the admissible domain W (or a collision guard).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation failed; `what()` names the failed assumption.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state during time integration; carries the failing time.
class IntegrationBlowupError : public std::runtime_error {
public:
    IntegrationBlowupError(const std::string& msg, double t)
        : std::runtime_error(msg + " (t=" + std::to_string(t) + ")"), time(t) {}
    double time;
};

/// Linear algebra breakdown (SVD failure, singular map where none expected).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver did not converge; carries the residual history.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& msg, std::vector<double> residuals)
        : std::runtime_error(msg), history(std::move(residuals)) {}
    std::vector<double> history;

    double last_residual() const { return history.empty() ? -1.0 : history.back(); }
};

}  // namespace meanloop
