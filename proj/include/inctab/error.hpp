#pragma once

#include <stdexcept>
#include <string>

namespace inctab {

enum class ErrorKind {
    Syntax,
    Existence,
    Permission,
    Instantiation,
    Type,
    Io,
    Timeout,
    Internal,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Existence: return "existence";
    case ErrorKind::Permission: return "permission";
    case ErrorKind::Instantiation: return "instantiation";
    case ErrorKind::Type: return "type";
    case ErrorKind::Io: return "i/o";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

/// All engine failures surface as this exception type.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + " error: " + msg), kind_(kind), detail_(msg) {}

    ErrorKind kind() const { return kind_; }
    /// Message without the kind prefix.
    const std::string& detail() const { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

} // namespace inctab
