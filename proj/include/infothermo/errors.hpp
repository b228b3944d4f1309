#pragma once

#include <stdexcept>
#include <string>

namespace infothermo {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (not Hermitian, not a state, bad POVM, ...).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Relative entropy is infinite: supp(rho) is not contained in supp(sigma).
class SupportViolation : public Error {
public:
    using Error::Error;
};

/// Input is not classical (off-diagonal entries or a non-permutation unitary).
class NotClassical : public Error {
public:
    using Error::Error;
};

/// Reconstruction of a measurement decomposition failed; carries the deviation.
class ReconstructionFailure : public Error {
public:
    ReconstructionFailure(const std::string& what, double deviation)
        : Error(what), max_deviation(deviation) {}
    double max_deviation;
};

/// A schedule left more than the allowed residual outside the standard branch.
class NotAnErasure : public Error {
public:
    NotAnErasure(const std::string& what, double residual) : Error(what), residual(residual) {}
    double residual;
};

/// A conditional measurement schedule does not realize the supplied measurement model.
class InvalidSchedule : public Error {
public:
    using Error::Error;
};

/// Numerical integration became unstable (step too large, NaN trajectory, ...).
class NumericalInstability : public Error {
public:
    using Error::Error;
};

/// Malformed input document; the message carries source, line and column when known.
class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace infothermo
