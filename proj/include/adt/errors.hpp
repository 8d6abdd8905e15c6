#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adt {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is not time-ordered where ordering is required.
class OrderingError : public Error {
public:
    using Error::Error;
};

/// Invalid filter / detector parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Signal too short for the requested operation.
class LengthError : public Error {
public:
    using Error::Error;
};

/// Caller supplied values that violate an operation's preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

/// A wire record could not be decoded. `field()` names the offending
/// envelope field (e.g. "seq").
class DecodeError : public Error {
public:
    DecodeError(std::string field, const std::string& why)
        : Error(field + ": " + why), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Malformed or invalid recording line. Line numbers are 1-based.
class RecordingError : public Error {
public:
    RecordingError(std::size_t line, const std::string& why)
        : Error("line " + std::to_string(line) + ": " + why), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ParseError : public RecordingError {
public:
    using RecordingError::RecordingError;
};

class ValidationError : public RecordingError {
public:
    using RecordingError::RecordingError;
};

/// Correlation is undefined (zero variance) or inputs are mismatched.
class CorrelationError : public Error {
public:
    using Error::Error;
};

class PersistenceError : public Error {
public:
    using Error::Error;
};

}  // namespace adt
