#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace pathfinder {

/// 1 / (1 + exp(x)). Evaluated without overflow for any finite x.
inline double logistic_complement(double x) noexcept {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

/// 1 / (1 + exp(-x)).
inline double logistic(double x) noexcept { return logistic_complement(-x); }

/// Inclusive arithmetic range lo, lo+step, ... <= hi (with a 1e-9 relative
/// slack on the last point). Values are computed as lo + i*step.
std::vector<double> linspace_step(double lo, double hi, double step);

/// Parses "lo:hi:step" into linspace_step. Throws invalid_argument.
std::vector<double> parse_range(const std::string& text);

/// printf("%.12g"), the fixed float format of every CSV this project writes.
std::string format_float(double value);

/// Runs body(i) for i in [0, count) on up to thread_limit() threads.
/// Each index is handled exactly once; callers write results by index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// PATHFINDER_THREADS if set and positive, else hardware concurrency (>= 1).
unsigned thread_limit();

}  // namespace pathfinder
