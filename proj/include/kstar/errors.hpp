#pragma once

#include <stdexcept>
#include <string>

namespace kstar {

// Mismatched dimensions, incompatible containers, misuse of an API.
struct StructuralError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A mathematical precondition fails (hbar <= 0, nonzero constant term, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Constant term of a metric is singular.
struct DegenerateMetricError : DomainError {
    using DomainError::DomainError;
};

// The truncated H matrix is singular, so no Fock dictionary exists at this
// truncation / parameter choice.
struct RepresentationFailureError : DomainError {
    using DomainError::DomainError;
};

// Evaluation hits a pole of a coefficient function (e.g. c_n at 1/hbar = L
// with n > L on the projective model).
struct PoleError : DomainError {
    using DomainError::DomainError;
};

// Invalid chart transition data (Jacobian singular at the base point, index
// outside the finite block, ...).
struct ChartError : DomainError {
    using DomainError::DomainError;
};

// Malformed input file.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal consistency check failed; indicates a bug, not a user error.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace kstar
