#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace genrehawkes {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A record in an input file could not be turned into an Event.
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, std::string field, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": field '" + field + "': " + what),
          source_(std::move(source)),
          line_(line),
          field_(std::move(field)) {}

    [[nodiscard]] const std::string& source() const noexcept { return source_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string source_;
    std::size_t line_;
    std::string field_;
};

/// The model parameters make the requested computation meaningless
/// (e.g. forecasting from a supercritical Hawkes fit).
class RefusedError : public Error {
public:
    using Error::Error;
};

}  // namespace genrehawkes
