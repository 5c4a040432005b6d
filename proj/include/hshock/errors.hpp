#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hshock {

enum class ErrorKind {
    InvalidInput,
    InvalidConfiguration,
    InvalidArgument,
    Parse,
    Duplicate,
    EmptyCohort,
    Unavailable,
    DegenerateFit,
    HorizonOutOfRange,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so the CLI can map it
// onto an exit code without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Parse errors remember the 1-based input line they were raised on.
class ParseError : public Error {
public:
    ParseError(ErrorKind kind, std::size_t line, const std::string &reason)
        : Error(kind, "line " + std::to_string(line) + ": " + reason), line_(line),
          reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string &reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

} // namespace hshock
