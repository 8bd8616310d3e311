#include "pathfinder/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "pathfinder/error.hpp"

namespace pathfinder {

namespace {

constexpr int kMaxNewton = 100;

// Node tables are pure functions of the point count; cache them.
template <typename Build>
const QuadratureRule& cached(std::map<int, QuadratureRule>& cache, std::mutex& mutex, int points, Build build) {
    std::lock_guard lock(mutex);
    auto it = cache.find(points);
    if (it == cache.end()) {
        it = cache.emplace(points, build(points)).first;
    }
    return it->second;
}

QuadratureRule build_legendre(int n) {
    QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double derivative = 0.0;
        for (int iter = 0; iter < kMaxNewton; ++iter) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
            }
            derivative = n * (x * p0 - p1) / (x * x - 1.0);
            const double step = p0 / derivative;
            x -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Newton on the orthonormal Hermite recurrence, seeded from the asymptotic
// root estimates of the classic gauher routine.
QuadratureRule build_hermite(int n) {
    QuadratureRule rule{std::vector<double>(n), std::vector<double>(n)};
    const double pim4 = std::pow(std::numbers::pi, -0.25);
    double z = 0.0;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double derivative = 0.0;
        for (int iter = 0; iter < kMaxNewton; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            derivative = std::sqrt(2.0 * n) * p2;
            const double step = p1 / derivative;
            z -= step;
            if (std::abs(step) < 1e-15) {
                break;
            }
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (derivative * derivative);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int points) {
    require(points >= 1, ErrorCode::invalid_argument, "Gauss-Legendre needs at least one point");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    return cached(cache, mutex, points, build_legendre);
}

QuadratureRule gauss_hermite(int points) {
    require(points >= 1, ErrorCode::invalid_argument, "Gauss-Hermite needs at least one point");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    return cached(cache, mutex, points, build_hermite);
}

int gaussian_panel_count(double sigma, double beta, const GaussianRuleOptions& options) {
    const double needed = std::ceil(2.0 * options.z_max * sigma * beta);
    return std::max(options.min_panels, static_cast<int>(std::min(needed, 1e7)));
}

QuadratureRule gaussian_expectation_rule(double sigma, int panels, const GaussianRuleOptions& options) {
    require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::invalid_argument, "sigma must be finite and >= 0");

    if (options.method == GaussianMethod::gauss_hermite) {
        // xi = sqrt(2) sigma t
        QuadratureRule rule = gauss_hermite(options.hermite_nodes);
        const double scale = std::sqrt(2.0) * sigma;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            rule.nodes[k] *= scale;
            rule.weights[k] /= std::sqrt(std::numbers::pi);
        }
        return rule;
    }

    require(panels >= 1, ErrorCode::invalid_argument, "composite rule needs at least one panel");
    const QuadratureRule base = gauss_legendre(options.panel_points);
    const double width = 2.0 * options.z_max / panels;
    const double half = 0.5 * width;
    const double density = 1.0 / std::sqrt(2.0 * std::numbers::pi);

    QuadratureRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(panels) * base.nodes.size());
    rule.weights.reserve(rule.nodes.capacity());
    for (int p = 0; p < panels; ++p) {
        const double centre = -options.z_max + (p + 0.5) * width;
        for (std::size_t k = 0; k < base.nodes.size(); ++k) {
            const double z = centre + half * base.nodes[k];
            rule.nodes.push_back(sigma * z);
            rule.weights.push_back(half * base.weights[k] * density * std::exp(-0.5 * z * z));
        }
    }
    return rule;
}

}  // namespace pathfinder
