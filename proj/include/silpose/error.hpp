#pragma once

#include <stdexcept>
#include <string>

namespace silpose {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A value that parsed fine but violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File system failure (missing file, unwritable path, empty directory).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace silpose
