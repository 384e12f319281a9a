#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace viltwin {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input supplied by the caller: arguments, files, schemas.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A text record that failed to parse. `line()` is 1-based.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownTopicError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace viltwin
