#pragma once

#include <stdexcept>
#include <string>

namespace wsm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point, time or argument lies outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration (bad parameters, scope mismatch, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The process family does not provide the requested capability.
class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

/// Event index out of range for a sequence.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Dataset content violates an invariant (unsorted times, marks out of range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable numerical result.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Linear system that cannot be solved reliably.
class RankDeficiencyError : public NumericError {
public:
    RankDeficiencyError(const std::string& what, double condition_number, double min_eigenvalue)
        : NumericError(what), condition_number_(condition_number), min_eigenvalue_(min_eigenvalue) {}

    [[nodiscard]] double condition_number() const noexcept { return condition_number_; }
    [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double condition_number_;
    double min_eigenvalue_;
};

/// The survival-corrected intensity has a non-positive denominator.
class CorrectionInvalidError : public NumericError {
public:
    CorrectionInvalidError(const std::string& what, double continuation, double survivor_at_horizon)
        : NumericError(what), continuation_(continuation), survivor_at_horizon_(survivor_at_horizon) {}

    [[nodiscard]] double continuation() const noexcept { return continuation_; }
    [[nodiscard]] double survivor_at_horizon() const noexcept { return survivor_at_horizon_; }

private:
    double continuation_;
    double survivor_at_horizon_;
};

} // namespace wsm
