#pragma once

#include <stdexcept>
#include <string>

namespace flickermine {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A MiningConfig field is outside its valid range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed detection stream, report, manifest or annotation document.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    explicit ParseError(const std::string& what) : ParseError(what, 0) {}

    /// 1-based input line, 0 when not line-addressable.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_ = 0;
};

/// Image shape or content violates an operation's precondition.
class ImageError : public Error {
public:
    using Error::Error;
};

/// A patch with (numerically) zero intensity variance; NCC is undefined there.
class ZeroVarianceError : public ImageError {
public:
    using ImageError::ImageError;
};

/// Missing frame file, decode failure or out-of-range frame index.
class FrameAccessError : public Error {
public:
    using Error::Error;
};

/// Inconsistent inputs handed to an operation (dangling references, precondition breaks).
class InvalidInput : public Error {
public:
    using Error::Error;
};

}  // namespace flickermine
