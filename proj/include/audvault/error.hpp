#pragma once

#include <stdexcept>
#include <string>

namespace audvault {

enum class ErrorCode {
    InvalidArgument,   // malformed input supplied by the caller
    Validation,        // value or structure violates a declared constraint
    NotFound,          // dataset, version, file, or key does not exist
    Conflict,          // target already exists or is locked by someone else
    Timeout,
    Corrupt,           // stored content fails integrity checks
    Io,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::NotFound: return "not found";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Corrupt: return "corrupt";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // True for errors caused by caller input rather than the environment.
    bool is_user_error() const noexcept {
        return code_ == ErrorCode::InvalidArgument || code_ == ErrorCode::Validation ||
               code_ == ErrorCode::NotFound || code_ == ErrorCode::Conflict;
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace audvault
