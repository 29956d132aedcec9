#pragma once

#include <stdexcept>
#include <string>

namespace dshock {

// Base class for all failures raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// f'(U1) == f'(U0): no gradient catastrophe, t* is infinite.
struct DegenerateStates : Error {
    using Error::Error;
};

// Target value for the monotone profile inversion lies outside [f'(U0), f'(U1)].
struct RootNotBracketed : Error {
    using Error::Error;
};

// Refining the quadrature changed the result beyond the allowed drift.
struct QuadratureNotConverged : Error {
    using Error::Error;
};

// Halving the ODE step changed the solution beyond the allowed drift.
struct StepNotConverged : Error {
    using Error::Error;
};

// Forward characteristic map lost invertibility (spreading constant too small).
struct JacobianNonPositive : Error {
    using Error::Error;
};

// Boundary curves left their required order during integration.
struct OrderingViolation : Error {
    using Error::Error;
};

// Variational and finite-difference Jacobians disagree beyond tolerance.
struct CrossCheckFailed : Error {
    using Error::Error;
};

// Mass window edges are not in the plateau regions.
struct WindowTooSmall : Error {
    using Error::Error;
};

// Closed-form reference queried outside its validity range.
struct OutOfValidity : Error {
    using Error::Error;
};

// Run configuration is malformed or violates the schema.
struct ConfigError : Error {
    using Error::Error;
};

// Problem instance violates structural preconditions (not admissibility).
struct InvalidProblem : Error {
    using Error::Error;
};

}  // namespace dshock
