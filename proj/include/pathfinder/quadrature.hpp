#pragma once

#include <vector>

namespace pathfinder {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre on [-1, 1].
QuadratureRule gauss_legendre(int points);

/// n-point Gauss-Hermite for the weight exp(-t^2) on the real line.
QuadratureRule gauss_hermite(int points);

enum class GaussianMethod { composite_legendre, gauss_hermite };

struct GaussianRuleOptions {
    GaussianMethod method = GaussianMethod::composite_legendre;
    int hermite_nodes = 61;
    int panel_points = 8;
    double z_max = 9.0;   // truncation of the standard-normal variable
    int min_panels = 18;
};

/// Panels needed so each one spans at most one standard deviation and at
/// most 1/beta in utility units: max(min_panels, ceil(2 z_max sigma beta)).
int gaussian_panel_count(double sigma, double beta, const GaussianRuleOptions& options = {});

/// Rule with E[f(xi)] ~= sum_k w_k f(xi_k) for xi ~ N(0, sigma^2). Nodes are
/// values of xi; weights sum to 1 up to the truncated tail (< 1e-18).
/// `panels` is ignored by the Gauss-Hermite method.
QuadratureRule gaussian_expectation_rule(double sigma, int panels, const GaussianRuleOptions& options = {});

}  // namespace pathfinder
