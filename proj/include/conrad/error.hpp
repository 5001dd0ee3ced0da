#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conrad {

enum class ErrorKind {
    InvalidInput,
    Config,
    OutOfBounds,
    Contract,
    Convergence,
    Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it onto an exit code and callers can branch without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::Config: return "config error";
    case ErrorKind::OutOfBounds: return "out of bounds";
    case ErrorKind::Contract: return "contract violation";
    case ErrorKind::Convergence: return "convergence failure";
    case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

}  // namespace conrad
