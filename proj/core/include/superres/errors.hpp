#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace superres {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A requested capability is not supported by the object (e.g. a derivative
/// order beyond what a tabulated PSF can evaluate).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// A quadrature or other numerical routine failed its internal accuracy check.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Gram-Schmidt ran into a numerically dependent function set.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& msg, int order)
        : Error(msg), offending_order(order) {}
    int offending_order;
};

/// A displaced-state expansion left too much weight outside the basis.
class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, double residual, int dim)
        : Error(msg), residual(residual), dim(dim) {}
    double residual;
    int dim;
};

/// Invalid parameter value (outside the model domain).
class DomainError : public Error {
public:
    using Error::Error;
};

/// API misuse, e.g. combining objects built for different displacements.
class UsageError : public Error {
public:
    using Error::Error;
};

/// A matrix inversion hit a (numerically) singular matrix.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& msg, std::array<double, 3> null_dir)
        : Error(msg), null_direction(null_dir) {}
    std::array<double, 3> null_direction;
};

/// Nonlinear fit failed to converge; carries the best point found.
class FitFailureError : public Error {
public:
    FitFailureError(const std::string& msg, std::array<double, 3> best, double residual,
                    int iterations)
        : Error(msg), best_params(best), residual(residual), iterations(iterations) {}
    std::array<double, 3> best_params;
    double residual;
    int iterations;
};

/// Observed data carry no information about the parameters.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

}  // namespace superres
