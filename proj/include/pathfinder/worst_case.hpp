#pragma once

// All-reject ("worst case") analysis for a group of n candidate flights that
// are each independently rejective (utility U-) with probability alpha and
// receptive (utility U+) otherwise.
//
//   W(alpha)        = (alpha p_rej + (1-alpha) p_rec)^n
//   W_sys(alpha)    = same, utilities shifted by (1-S) gamma R
//   W(alpha, theta) = E_xi[ m(xi)^n ], xi a utility shift shared by all agents
//
// Tipping points solve W(alpha*) = delta.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathfinder/quadrature.hpp"

namespace pathfinder {

struct WorstCaseScenario {
    int n = 10;
    double u_minus = -2.0;
    double u_plus = 2.0;
    double beta = 1.0;
    double delta = 0.1;

    void validate() const;
};

struct SocialParams {
    double s = 1.0;      // selfishness
    double gamma = 1.0;  // > 0
    double r = 0.0;      // estimated rejection rate

    void validate() const;
};

enum class NoiseKind { gaussian, rademacher };

std::string to_string(NoiseKind kind);
/// Accepts "gaussian" or "rademacher"; throws invalid_argument.
NoiseKind noise_kind_from_string(const std::string& text);

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double theta = 0.0;  // sigma or kappa

    void validate() const;
};

struct RejectPair {
    double rejective;
    double receptive;
};

struct NoiseOptions {
    GaussianRuleOptions gaussian;
    /// Fixes the composite-rule panel count; otherwise derived from theta.
    std::optional<int> panels;
};

RejectPair group_reject_probs(const WorstCaseScenario& scn);

/// (alpha r + (1-alpha) c)^n for an arbitrary pair.
double mixture_worst_case(const RejectPair& probs, int n, double alpha);

/// Closed form (delta^(1/n) - c) / (r - c); throws no_tipping_point when
/// delta^(1/n) is outside [c, r].
double mixture_tipping_point(const RejectPair& probs, int n, double delta);

double worst_case_prob(const WorstCaseScenario& scn, double alpha);
double tipping_point(const WorstCaseScenario& scn);

RejectPair social_reject_probs(const WorstCaseScenario& scn, const SocialParams& soc);
double social_worst_case_prob(const WorstCaseScenario& scn, const SocialParams& soc, double alpha);
double social_tipping_point(const WorstCaseScenario& scn, const SocialParams& soc);

/// Exact two-point average for Rademacher; quadrature for Gaussian.
/// theta == 0 returns worst_case_prob exactly.
double noisy_worst_case_prob(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                             const NoiseOptions& options = {});

/// Bisection on alpha; |W(alpha*, theta) - delta| <= 1e-10.
double noisy_tipping_point(const WorstCaseScenario& scn, const NoiseSpec& noise, const NoiseOptions& options = {});

/// dW/dtheta by central differences (h = 1e-4). W is even in theta, so below
/// theta = h the lower point is reflected; the derivative at theta = 0 is 0.
double noisy_dw_dtheta(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                       const NoiseOptions& options = {});

/// dW/dalpha by central differences (h = 1e-4), one-sided at the ends of [0,1].
double noisy_dw_dalpha(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                       const NoiseOptions& options = {});

struct TippingGradient {
    double alpha_star;
    double dw_dtheta;
    double dw_dalpha;
    double dalpha_dtheta;  // -dw_dtheta / dw_dalpha
};

/// Implicit-function derivative of the tipping point with respect to theta.
/// Throws no_tipping_point, or degenerate_gradient when |dW/dalpha| < 1e-14.
TippingGradient tipping_point_gradient(const WorstCaseScenario& scn, const NoiseSpec& noise,
                                       const NoiseOptions& options = {});

/// (alpha*(theta+h) - alpha*(theta-h)) / 2h, the direct estimator the
/// implicit derivative is checked against. Requires theta >= h.
double tipping_point_derivative_direct(const WorstCaseScenario& scn, const NoiseSpec& noise, double h = 1e-3,
                                       const NoiseOptions& options = {});

struct GradientSignRow {
    int n;
    double u_abs;
    NoiseKind kind;
    double fraction_negative;
};

struct GradientCell {
    int n;
    double u_abs;
    NoiseKind kind;
    double alpha;
    double theta;
    double dw_dtheta;
};

struct GradientMapOptions {
    double beta = 1.0;
    double negative_threshold = -1e-12;
    NoiseOptions noise;
};

/// For each (n, |U|), the fraction of (alpha, theta) cells whose dW/dtheta
/// is below the negative threshold. Rows ordered by n, then |U|. When
/// `cells` is given, every evaluated cell is appended to it in row order.
std::vector<GradientSignRow> gradient_sign_map(std::span<const int> n_values, std::span<const double> u_abs_values,
                                               NoiseKind kind, std::span<const double> alpha_grid,
                                               std::span<const double> theta_grid,
                                               const GradientMapOptions& options = {},
                                               std::vector<GradientCell>* cells = nullptr);

/// Header `n,u_abs,noise_kind,fraction_negative`.
std::string gradient_map_to_csv(std::span<const GradientSignRow> rows);
/// Header `n,u_abs,noise_kind,alpha,theta,dw_dtheta`.
std::string gradient_cells_to_csv(std::span<const GradientCell> cells);

}  // namespace pathfinder
