#pragma once

#include <stdexcept>
#include <string>

namespace fpk {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A(x) failed to factor; the coefficient set violates its ellipticity bounds.
struct SingularMatrix : Error {
    using Error::Error;
};

/// Domain kind has no reflection rule for the extension operator.
struct UnsupportedDomain : Error {
    using Error::Error;
};

/// Structural validation of a problem definition failed.
struct ValidationFailed : Error {
    using Error::Error;
};

/// Deterministic quadrature requested in a dimension it does not support.
struct UnsupportedQuadDim : Error {
    using Error::Error;
};

/// Iterated-quadrature work estimate exceeds the configured budget.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// Time series not on a usable uniform grid.
struct BadGrid : Error {
    using Error::Error;
};

/// Monte Carlo budget too small to resolve the requested quantity.
struct InsufficientBudget : Error {
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
struct ToleranceNotMet : Error {
    using Error::Error;
};

/// Space-time field too coarse for the requested stencil.
struct GridTooCoarse : Error {
    using Error::Error;
};

/// Bad key or value in a run configuration; message names the offending key.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fpk
