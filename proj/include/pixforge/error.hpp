#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pixforge {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes; carries the byte offset where parsing stopped.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Operand dimensions do not compose.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A scalar argument lies outside its documented range.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Numerical failure detected at run time (non-finite loss, corrupted spectrum).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace pixforge
