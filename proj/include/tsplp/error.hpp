#pragma once

#include <stdexcept>
#include <string>

namespace tsplp {

// Base of every error raised by the library. Callers that only need to
// report failures can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid generator/build options.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Random generation could not satisfy a requested property.
class GenerationError : public Error {
public:
    using Error::Error;
};

// Malformed text input. Line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        std::string s = "line " + std::to_string(line);
        if (column != 0) s += ", column " + std::to_string(column);
        return s + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
};

// Argument outside the domain of an operation (bad tour, index out of range).
class ValidationError : public Error {
public:
    using Error::Error;
};

// The LP model is only defined for more than five cities.
class DomainError : public Error {
public:
    using Error::Error;
};

class FileError : public Error {
public:
    using Error::Error;
};

}  // namespace tsplp
