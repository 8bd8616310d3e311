#include "pathfinder/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "pathfinder/error.hpp"

namespace pathfinder {

std::vector<double> linspace_step(double lo, double hi, double step) {
    require(std::isfinite(lo) && std::isfinite(hi) && std::isfinite(step), ErrorCode::invalid_argument,
            "range bounds must be finite");
    require(step > 0.0, ErrorCode::invalid_argument, "range step must be positive");
    require(hi >= lo, ErrorCode::invalid_argument, "range upper bound is below lower bound");
    const double span = (hi - lo) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(std::min(hi, lo + static_cast<double>(i) * step));
    }
    return out;
}

namespace {

double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        fail(ErrorCode::invalid_argument, "cannot parse number '" + std::string(text) + "' in " + context);
    }
    return value;
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
    const auto first = text.find(':');
    const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        text.find(':', second + 1) != std::string::npos) {
        fail(ErrorCode::invalid_argument, "range must look like lo:hi:step, got '" + text + "'");
    }
    const std::string_view view(text);
    return linspace_step(parse_double(view.substr(0, first), text),
                         parse_double(view.substr(first + 1, second - first - 1), text),
                         parse_double(view.substr(second + 1), text));
}

std::string format_float(double value) {
    char buffer[64];
    // Signed zero would print as "-0".
    std::snprintf(buffer, sizeof buffer, "%.12g", value == 0.0 ? 0.0 : value);
    return buffer;
}

unsigned thread_limit() {
    if (const char* env = std::getenv("PATHFINDER_THREADS")) {
        const long requested = std::strtol(env, nullptr, 10);
        if (requested > 0) {
            return static_cast<unsigned>(requested);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(thread_limit(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    // Static contiguous blocks: which thread ran an index never affects output.
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                const std::size_t begin = count * w / workers;
                const std::size_t end = count * (w + 1) / workers;
                try {
                    for (std::size_t i = begin; i < end; ++i) {
                        body(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

}  // namespace pathfinder
