#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcabs {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (expressions, property strings, interchange files).
/// `position` is a 0-based character offset or a 1-based line number,
/// depending on the producer; see the message.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// A numeric precondition failed during evaluation (division by an interval
/// containing zero, non-finite values, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid system / run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace rcabs
