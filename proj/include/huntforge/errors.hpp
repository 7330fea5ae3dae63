#pragma once

#include <stdexcept>
#include <string>

namespace huntforge {

enum class ErrorCode {
    invalid_argument,
    parse,
    bind,
    not_found,
    conflict,
    unavailable,
    not_applicable,
    io,
};

/// Base error for every failure raised by the engine and its modules.
class HuntError : public std::runtime_error {
public:
    HuntError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline HuntError invalid(const std::string& what) { return {ErrorCode::invalid_argument, what}; }
inline HuntError not_found(const std::string& what) { return {ErrorCode::not_found, what}; }
inline HuntError conflict(const std::string& what) { return {ErrorCode::conflict, what}; }

}  // namespace huntforge
