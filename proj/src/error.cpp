#include "pathfinder/error.hpp"

namespace pathfinder {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::non_unique_stationary: return "non_unique_stationary";
        case ErrorCode::numerical: return "numerical";
        case ErrorCode::empty_grid: return "empty_grid";
        case ErrorCode::empty_candidate_set: return "empty_candidate_set";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::no_tipping_point: return "no_tipping_point";
        case ErrorCode::degenerate_gradient: return "degenerate_gradient";
        case ErrorCode::insufficient_data: return "insufficient_data";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::config_invalid: return "config_invalid";
        case ErrorCode::io_error: return "io_error";
    }
    return "unknown";
}

}  // namespace pathfinder
