#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mwalk {

// Base type for every error this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A chart was evaluated, or a step landed, outside its coordinate domain.
class ChartDomainViolation : public Error {
public:
    using Error::Error;
};

// Metric eigenvalues collapsed below the rank tolerance.
class DegenerateMetric : public Error {
public:
    using Error::Error;
};

// A constraint Jacobian lost row rank at an on-manifold point.
class RankDeficient : public Error {
public:
    using Error::Error;
};

// The tangent space is zero-dimensional; there is nothing to sample.
class EmptyTangent : public Error {
public:
    using Error::Error;
};

// No chart contains the requested point with the required margin.
class NoChartWithMargin : public Error {
public:
    using Error::Error;
};

// Newton projection failed to meet its stopping rule.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double residual)
        : Error(what), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

// A walk kept failing after the maximum number of stepsize halvings.
class TooManyRestarts : public Error {
public:
    using Error::Error;
};

// A statistical test was configured with too few samples per bin.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

// No reference exponential map (closed form or ODE) exists for the manifold.
class OracleUnavailable : public Error {
public:
    using Error::Error;
};

// Dimensions of inputs are inconsistent or out of the supported range.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration (CLI flags, config files, manifold descriptors).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Expression text failed to parse; offset is the byte position in the input.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what), offset(offset) {}
    std::size_t offset;
};

// An identifier is neither a variable, a constant, nor a known function.
class UnknownIdentifier : public Error {
public:
    using Error::Error;
};

// An expression references a variable index at or beyond the declared arity.
class ArityMismatch : public Error {
public:
    using Error::Error;
};

// Evaluation hit a domain fault (log of a non-positive value, division by
// zero, sqrt of a negative, fractional power of a negative).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace mwalk
