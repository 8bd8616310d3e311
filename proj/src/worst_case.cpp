#include "pathfinder/worst_case.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pathfinder/error.hpp"
#include "pathfinder/kernels.hpp"
#include "pathfinder/numeric.hpp"

namespace pathfinder {

namespace {

constexpr double kFdStep = 1e-4;
constexpr double kBoundarySlack = 1e-12;
constexpr double kDegenerateSlope = 1e-14;

void check(bool ok, const std::string& what) { require(ok, ErrorCode::invalid_argument, what); }

void check_alpha(double alpha) { check(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0,1]"); }

int panels_for(const NoiseSpec& noise, double beta, const NoiseOptions& options) {
    if (options.panels) {
        return *options.panels;
    }
    // Resolve at least the finite-difference offset scale so that theta = 0
    // and theta = h share a rule.
    return gaussian_panel_count(std::max(noise.theta, kFdStep), beta, options.gaussian);
}

// W(., theta) with its quadrature nodes built once.
class NoisyCurve {
public:
    NoisyCurve(const WorstCaseScenario& scn, NoiseKind kind, double theta, int panels, const NoiseOptions& options)
        : scn_(scn), exact_(theta == 0.0) {
        if (exact_) {
            probs_ = group_reject_probs(scn);
        } else if (kind == NoiseKind::rademacher) {
            shifts_ = {theta, -theta};
            weights_ = {0.5, 0.5};
        } else {
            QuadratureRule q = gaussian_expectation_rule(theta, panels, options.gaussian);
            shifts_ = std::move(q.nodes);
            weights_ = std::move(q.weights);
        }
    }

    double operator()(double alpha) const {
        if (exact_) {
            return mixture_worst_case(probs_, scn_.n, alpha);
        }
        const kernels::MixtureShape shape{alpha, scn_.beta, scn_.u_minus, scn_.u_plus, scn_.n};
        return kernels::expected_mixture_power(shape, shifts_, weights_);
    }

private:
    WorstCaseScenario scn_;
    bool exact_;
    RejectPair probs_{};
    std::vector<double> shifts_;
    std::vector<double> weights_;
};

// Central difference in theta. Both noise laws are symmetric, so W is even
// in theta and the point below zero is read at |theta - h|; at theta = 0 the
// two stencil points coincide and the derivative is exactly 0.
class ThetaStencil {
public:
    ThetaStencil(const WorstCaseScenario& scn, const NoiseSpec& noise, int panels, const NoiseOptions& options)
        : up_(scn, noise.kind, noise.theta + kFdStep, panels, options),
          down_(scn, noise.kind, std::abs(noise.theta - kFdStep), panels, options) {}

    double operator()(double alpha) const { return (up_(alpha) - down_(alpha)) / (2.0 * kFdStep); }

private:
    NoisyCurve up_;
    NoisyCurve down_;
};

double dw_dalpha_at(const NoisyCurve& w, double alpha) {
    const double h = kFdStep;
    if (alpha < h) {
        return (w(alpha + h) - w(alpha)) / h;
    }
    if (alpha > 1.0 - h) {
        return (w(alpha) - w(alpha - h)) / h;
    }
    return (w(alpha + h) - w(alpha - h)) / (2.0 * h);
}

double bisect_tipping_point(const NoisyCurve& w, double delta, double theta) {
    const double w_lo = w(0.0);
    const double w_hi = w(1.0);
    if (!(w_lo <= delta && delta <= w_hi)) {
        std::ostringstream msg;
        msg << "delta=" << delta << " is outside [W(0), W(1)] = [" << w_lo << ", " << w_hi << "] at theta=" << theta;
        fail(ErrorCode::no_tipping_point, msg.str());
    }
    double lo = 0.0;
    double hi = 1.0;
    double f_lo = w_lo - delta;
    double f_hi = w_hi - delta;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double f_mid = w(mid) - delta;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
}

}  // namespace

void WorstCaseScenario::validate() const {
    check(n >= 1, "n must be >= 1");
    check(std::isfinite(u_minus) && u_minus < 0.0, "u_minus must be finite and < 0");
    check(std::isfinite(u_plus) && u_plus > 0.0, "u_plus must be finite and > 0");
    check(std::isfinite(beta) && beta > 0.0, "beta must be finite and > 0");
    check(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
}

void SocialParams::validate() const {
    check(s >= 0.0 && s <= 1.0, "s must lie in [0,1]");
    check(std::isfinite(gamma) && gamma > 0.0, "gamma must be finite and > 0");
    check(r >= 0.0 && r <= 1.0, "r must lie in [0,1]");
}

void NoiseSpec::validate() const { check(std::isfinite(theta) && theta >= 0.0, "noise theta must be finite and >= 0"); }

std::string to_string(NoiseKind kind) { return kind == NoiseKind::gaussian ? "gaussian" : "rademacher"; }

NoiseKind noise_kind_from_string(const std::string& text) {
    if (text == "gaussian") {
        return NoiseKind::gaussian;
    }
    if (text == "rademacher") {
        return NoiseKind::rademacher;
    }
    fail(ErrorCode::invalid_argument, "unknown noise kind '" + text + "' (expected gaussian or rademacher)");
}

RejectPair group_reject_probs(const WorstCaseScenario& scn) {
    scn.validate();
    return {logistic_complement(scn.beta * scn.u_minus), logistic_complement(scn.beta * scn.u_plus)};
}

double mixture_worst_case(const RejectPair& probs, int n, double alpha) {
    check_alpha(alpha);
    return std::pow(alpha * probs.rejective + (1.0 - alpha) * probs.receptive, n);
}

double mixture_tipping_point(const RejectPair& probs, int n, double delta) {
    const double root = std::pow(delta, 1.0 / n);
    if (root < probs.receptive - kBoundarySlack || root > probs.rejective + kBoundarySlack) {
        std::ostringstream msg;
        msg << "delta^(1/n)=" << root << " is outside [" << probs.receptive << ", " << probs.rejective
            << "]; no mixture reaches delta=" << delta;
        fail(ErrorCode::no_tipping_point, msg.str());
    }
    const double alpha = (root - probs.receptive) / (probs.rejective - probs.receptive);
    return std::clamp(alpha, 0.0, 1.0);
}

double worst_case_prob(const WorstCaseScenario& scn, double alpha) {
    return mixture_worst_case(group_reject_probs(scn), scn.n, alpha);
}

double tipping_point(const WorstCaseScenario& scn) {
    return mixture_tipping_point(group_reject_probs(scn), scn.n, scn.delta);
}

RejectPair social_reject_probs(const WorstCaseScenario& scn, const SocialParams& soc) {
    scn.validate();
    soc.validate();
    const double shift = (1.0 - soc.s) * soc.gamma * soc.r;
    return {logistic_complement(scn.beta * (scn.u_minus + shift)),
            logistic_complement(scn.beta * (scn.u_plus + shift))};
}

double social_worst_case_prob(const WorstCaseScenario& scn, const SocialParams& soc, double alpha) {
    return mixture_worst_case(social_reject_probs(scn, soc), scn.n, alpha);
}

double social_tipping_point(const WorstCaseScenario& scn, const SocialParams& soc) {
    return mixture_tipping_point(social_reject_probs(scn, soc), scn.n, scn.delta);
}

double noisy_worst_case_prob(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                             const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    check_alpha(alpha);
    return NoisyCurve(scn, noise.kind, noise.theta, panels_for(noise, scn.beta, options), options)(alpha);
}

double noisy_tipping_point(const WorstCaseScenario& scn, const NoiseSpec& noise, const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    const NoisyCurve w(scn, noise.kind, noise.theta, panels_for(noise, scn.beta, options), options);
    return bisect_tipping_point(w, scn.delta, noise.theta);
}

double noisy_dw_dtheta(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                       const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    check_alpha(alpha);
    return ThetaStencil(scn, noise, panels_for(noise, scn.beta, options), options)(alpha);
}

double noisy_dw_dalpha(const WorstCaseScenario& scn, const NoiseSpec& noise, double alpha,
                       const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    check_alpha(alpha);
    return dw_dalpha_at(NoisyCurve(scn, noise.kind, noise.theta, panels_for(noise, scn.beta, options), options),
                        alpha);
}

TippingGradient tipping_point_gradient(const WorstCaseScenario& scn, const NoiseSpec& noise,
                                       const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    const int panels = panels_for(noise, scn.beta, options);
    TippingGradient out{};
    const NoisyCurve w(scn, noise.kind, noise.theta, panels, options);
    out.alpha_star = bisect_tipping_point(w, scn.delta, noise.theta);
    out.dw_dtheta = ThetaStencil(scn, noise, panels, options)(out.alpha_star);
    out.dw_dalpha = dw_dalpha_at(w, out.alpha_star);
    require(std::abs(out.dw_dalpha) >= kDegenerateSlope, ErrorCode::degenerate_gradient,
            "dW/dalpha vanishes at the tipping point; implicit derivative undefined");
    out.dalpha_dtheta = -out.dw_dtheta / out.dw_dalpha;
    return out;
}

double tipping_point_derivative_direct(const WorstCaseScenario& scn, const NoiseSpec& noise, double h,
                                       const NoiseOptions& options) {
    scn.validate();
    noise.validate();
    check(h > 0.0 && noise.theta >= h, "direct derivative needs 0 < h <= theta");
    NoiseOptions fixed = options;
    fixed.panels = panels_for(noise, scn.beta, options);
    const double up = noisy_tipping_point(scn, {noise.kind, noise.theta + h}, fixed);
    const double down = noisy_tipping_point(scn, {noise.kind, noise.theta - h}, fixed);
    return (up - down) / (2.0 * h);
}

std::vector<GradientSignRow> gradient_sign_map(std::span<const int> n_values, std::span<const double> u_abs_values,
                                               NoiseKind kind, std::span<const double> alpha_grid,
                                               std::span<const double> theta_grid,
                                               const GradientMapOptions& options, std::vector<GradientCell>* cells) {
    require(!n_values.empty() && !u_abs_values.empty() && !alpha_grid.empty() && !theta_grid.empty(),
            ErrorCode::empty_grid, "gradient sign map needs non-empty n, |U|, alpha and theta grids");
    for (double u : u_abs_values) {
        check(std::isfinite(u) && u > 0.0, "|U| values must be finite and > 0");
    }
    for (double a : alpha_grid) {
        check_alpha(a);
    }
    for (double t : theta_grid) {
        check(std::isfinite(t) && t >= 0.0, "theta grid values must be finite and >= 0");
    }

    const std::size_t n_alpha = alpha_grid.size();
    const std::size_t n_theta = theta_grid.size();
    const std::size_t n_rows = n_values.size() * u_abs_values.size();
    std::vector<double> gradients(n_rows * n_theta * n_alpha);

    parallel_for(n_rows * n_theta, [&](std::size_t job) {
        const std::size_t row = job / n_theta;
        const std::size_t t = job % n_theta;
        WorstCaseScenario scn;
        scn.n = n_values[row / u_abs_values.size()];
        const double u = u_abs_values[row % u_abs_values.size()];
        scn.u_minus = -u;
        scn.u_plus = u;
        scn.beta = options.beta;
        scn.validate();
        const NoiseSpec noise{kind, theta_grid[t]};
        const ThetaStencil dw_dtheta(scn, noise, panels_for(noise, scn.beta, options.noise), options.noise);
        for (std::size_t a = 0; a < n_alpha; ++a) {
            gradients[(row * n_theta + t) * n_alpha + a] = dw_dtheta(alpha_grid[a]);
        }
    });

    std::vector<GradientSignRow> rows;
    rows.reserve(n_rows);
    for (std::size_t row = 0; row < n_rows; ++row) {
        const int n = n_values[row / u_abs_values.size()];
        const double u = u_abs_values[row % u_abs_values.size()];
        std::size_t negative = 0;
        for (std::size_t t = 0; t < n_theta; ++t) {
            for (std::size_t a = 0; a < n_alpha; ++a) {
                const double g = gradients[(row * n_theta + t) * n_alpha + a];
                if (g < options.negative_threshold) {
                    ++negative;
                }
                if (cells != nullptr) {
                    cells->push_back({n, u, kind, alpha_grid[a], theta_grid[t], g});
                }
            }
        }
        rows.push_back({n, u, kind, static_cast<double>(negative) / static_cast<double>(n_alpha * n_theta)});
    }
    return rows;
}

std::string gradient_map_to_csv(std::span<const GradientSignRow> rows) {
    std::string out = "n,u_abs,noise_kind,fraction_negative\n";
    for (const auto& row : rows) {
        out += std::to_string(row.n) + ',' + format_float(row.u_abs) + ',' + to_string(row.kind) + ',' +
               format_float(row.fraction_negative) + '\n';
    }
    return out;
}

std::string gradient_cells_to_csv(std::span<const GradientCell> cells) {
    std::string out = "n,u_abs,noise_kind,alpha,theta,dw_dtheta\n";
    for (const auto& c : cells) {
        out += std::to_string(c.n) + ',' + format_float(c.u_abs) + ',' + to_string(c.kind) + ',' +
               format_float(c.alpha) + ',' + format_float(c.theta) + ',' + format_float(c.dw_dtheta) + '\n';
    }
    return out;
}

}  // namespace pathfinder
