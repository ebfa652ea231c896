#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blendcube {

// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownNameError : public Error {
public:
    using Error::Error;
};

class TypeMismatchError : public Error {
public:
    using Error::Error;
};

// Raised when a finer value rolls up to more than one coarser value.
class StrictnessError : public Error {
public:
    StrictnessError(std::string from, std::string to, std::string value, std::string message)
        : Error(std::move(message)), from_(std::move(from)), to_(std::move(to)), value_(std::move(value)) {}

    const std::string& from_level() const { return from_; }
    const std::string& to_level() const { return to_; }
    const std::string& value() const { return value_; }

private:
    std::string from_, to_, value_;
};

// A predicate splits a lower-level value's instances across E_sup and E_inf.
class ConstraintViolation : public Error {
public:
    ConstraintViolation(std::vector<std::string> offending, std::string message)
        : Error(std::move(message)), offending_(std::move(offending)) {}

    const std::vector<std::string>& offending_values() const { return offending_; }

private:
    std::vector<std::string> offending_;
};

// Syntax errors carry a 1-based column.
class ParseError : public Error {
public:
    ParseError(std::size_t column, const std::string& message)
        : Error("column " + std::to_string(column) + ": " + message), column_(column), detail_(message) {}

    std::size_t column() const { return column_; }
    const std::string& detail() const { return detail_; }

private:
    std::size_t column_;
    std::string detail_;
};

class OperatorError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    ValidationError(std::vector<std::string> problems, const std::string& message)
        : Error(message), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace blendcube
