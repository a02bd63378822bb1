#pragma once

#include <stdexcept>
#include <string>

namespace upb {

// Base for every failure the library reports by exception. Per-point sweep
// failures are not exceptions; they travel as Status values.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DegenerateSteadyState : public Error {
public:
    using Error::Error;
};

// Raised when the steady state has a negative eigenvalue beyond tolerance,
// which almost always means the Fock cutoff is too small.
class TruncationTooSmall : public Error {
public:
    using Error::Error;
};

class IntegrationFailure : public Error {
public:
    using Error::Error;
};

class ResolutionError : public Error {
public:
    using Error::Error;
};

class NoFeasibleOutput : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace upb
