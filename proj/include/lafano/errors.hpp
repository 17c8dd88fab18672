#pragma once

#include <stdexcept>
#include <string>

namespace lafano {

/// Base of all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad sizes, ranges or arguments supplied by the caller.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Eigensolver failure, NaN in a propagation, accuracy check failed.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Wavefunction reached the box edge harder than the absorber can handle.
class BoxTooSmallError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Malformed input file (CSV, JSON); the message carries the line number.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration; names the field and the accepted range.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace lafano
