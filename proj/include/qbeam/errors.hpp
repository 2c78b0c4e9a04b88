#pragma once

#include <stdexcept>
#include <string>

namespace qbeam {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A constructor or operation received a parameter outside its admissible range.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// A tabulated profile was evaluated outside its sample range.
class OutOfDomain : public Error {
public:
    using Error::Error;
};

/// A tabulated profile holds a value that violates the profile's sign constraint.
class InvalidProfile : public Error {
public:
    using Error::Error;
};

/// Diagnostics called with too few samples to form the required differences.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Arrays that must be co-sampled have different lengths.
class LengthMismatch : public Error {
public:
    using Error::Error;
};

/// Input field is empty or identically zero.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Grid does not contain the state it is asked to hold.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Field is no longer normalized; usually a sign it was modified after stepping.
class StaleState : public Error {
public:
    using Error::Error;
};

/// Second moments violate the Cauchy-Schwarz bound by more than rounding.
class InconsistentMoments : public Error {
public:
    using Error::Error;
};

/// Failure during time integration. Carries the path length where it occurred.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double s)
        : Error(what + " (s = " + std::to_string(s) + ")"), message_(what), s_(s) {}

    double s() const noexcept { return s_; }
    /// what() without the trailing location.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    double s_;
};

class EnvelopeCollapse : public SolverError {
public:
    using SolverError::SolverError;
};

class StiffnessError : public SolverError {
public:
    using SolverError::SolverError;
};

class StepSizeError : public SolverError {
public:
    using SolverError::SolverError;
};

class PositivityError : public SolverError {
public:
    using SolverError::SolverError;
};

class BoundaryLeak : public SolverError {
public:
    using SolverError::SolverError;
};

} // namespace qbeam
