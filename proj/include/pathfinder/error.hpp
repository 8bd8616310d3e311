#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathfinder {

enum class ErrorCode {
    invalid_argument,
    non_unique_stationary,
    numerical,
    empty_grid,
    empty_candidate_set,
    duplicate_id,
    no_tipping_point,
    degenerate_gradient,
    insufficient_data,
    parse_error,
    config_invalid,
    io_error,
};

/// Stable snake_case name, used on stderr by the CLI.
std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. Every failure carries a
/// machine-readable code plus a human message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        throw Error(code, message);
    }
}

}  // namespace pathfinder
