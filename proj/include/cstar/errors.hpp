#pragma once

#include <stdexcept>
#include <string>

namespace cstar {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix shapes do not match the operation (empty input, mixed sizes, ...).
struct DimensionError : Error {
    using Error::Error;
};

/// A documented precondition was violated (non-Hermitian input, non-unital
/// system, map from a space that is not an operator algebra, ...).
struct ContractViolation : Error {
    using Error::Error;
};

/// A space was required to contain the ambient identity but does not.
struct NotUnitalError : ContractViolation {
    using ContractViolation::ContractViolation;
};

/// A matrix claimed to lie in M_k(X) has a block outside the span of X.
struct MembershipError : Error {
    MembershipError(const std::string& what, int block, double dist)
        : Error(what), block_index(block), distance(dist) {}
    int block_index;
    double distance;
};

/// Random central-element sampling failed to separate eigenvalues.
struct NumericalDegeneracyError : Error {
    using Error::Error;
};

/// An internal structural check failed (e.g. a projection that should
/// commute with the corner projections does not).
struct InternalConsistencyError : Error {
    using Error::Error;
};

/// A decomposition was constructed but its certifying residuals are too
/// large to trust.
struct DecompositionError : Error {
    DecompositionError(const std::string& what, double worst)
        : Error(what), worst_residual(worst) {}
    double worst_residual;
};

}  // namespace cstar
