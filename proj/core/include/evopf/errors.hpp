#pragma once

#include <stdexcept>
#include <string>

namespace evopf {

/// Base class for all evopf errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data (file syntax, dangling references,
/// out-of-range values).
class InputError : public Error {
public:
    using Error::Error;
};

/// The network graph is not connected.
class DisconnectedError : public Error {
public:
    using Error::Error;
};

/// The network is connected but contains a cycle; the conic formulation
/// requires a radial (tree) feeder.
class NonRadialError : public Error {
public:
    using Error::Error;
};

/// A data structure (case, fleet, program, saved solution) failed its
/// consistency checks.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a reliable result.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Enumeration would exceed the configured pattern budget.
class EnumerationLimitError : public Error {
public:
    using Error::Error;
};

/// Phasor recovery was refused because the lifted solution is not tight
/// enough to represent a physical voltage profile.
class RecoveryRefusedError : public Error {
public:
    using Error::Error;
};

} // namespace evopf
