#pragma once

#include <stdexcept>
#include <string>

namespace joint3ee {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

// Gold annotations are inconsistent (overlapping spans, duplicate roles, ...).
class AnnotationError : public Error {
public:
    using Error::Error;
};

// A label is not part of the label schema in use.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace joint3ee
