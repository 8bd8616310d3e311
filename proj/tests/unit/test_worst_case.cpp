#include <doctest.h>

#include <cstdlib>
#include <vector>

#include "oracles.hpp"
#include "pathfinder/error.hpp"
#include "pathfinder/kernels.hpp"
#include "pathfinder/worst_case.hpp"

using namespace pathfinder;

namespace {

const WorstCaseScenario kReference{10, -2.0, 2.0, 1.0, 0.1};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected pathfinder::Error");
    return ErrorCode::numerical;
}

oracle::Scenario as_oracle(const WorstCaseScenario& s) { return {s.n, s.u_minus, s.u_plus, s.beta}; }

}  // namespace

TEST_CASE("scenario validation") {
    CHECK(code_of([] { WorstCaseScenario{0, -2, 2, 1, 0.1}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { WorstCaseScenario{10, 1, 2, 1, 0.1}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { WorstCaseScenario{10, -2, -1, 1, 0.1}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { WorstCaseScenario{10, -2, 2, 0, 0.1}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { WorstCaseScenario{10, -2, 2, 1, 1.0}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { SocialParams{1.5, 1, 0}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { SocialParams{0.5, 0, 0}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { NoiseSpec{NoiseKind::gaussian, -1}.validate(); }) == ErrorCode::invalid_argument);
    CHECK(code_of([] { worst_case_prob(kReference, 1.1); }) == ErrorCode::invalid_argument);
}

TEST_CASE("group rejection probabilities") {
    const auto p = group_reject_probs(kReference);
    CHECK(p.rejective == doctest::Approx(0.880797).epsilon(1e-6));
    CHECK(p.receptive == doctest::Approx(0.119203).epsilon(1e-5));
    CHECK(std::abs(p.rejective + p.receptive - 1.0) < 1e-12);

    const auto flat = group_reject_probs({10, -2, 2, 1e-9, 0.1});
    CHECK(flat.rejective == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(flat.receptive == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("worst case probability") {
    CHECK(worst_case_prob(kReference, 1.0) == doctest::Approx(std::pow(0.8807970779778823, 10)).epsilon(1e-14));
    CHECK(worst_case_prob(kReference, 1.0) == doctest::Approx(0.2810).epsilon(1e-3));
    CHECK(worst_case_prob(kReference, 0.0) == doctest::Approx(5.8e-10).epsilon(0.01));
    const WorstCaseScenario one{1, -1.3, 0.4, 2.0, 0.5};
    const auto p = group_reject_probs(one);
    for (double a : {0.0, 0.25, 0.7, 1.0}) {
        CHECK(worst_case_prob(one, a) == a * p.rejective + (1 - a) * p.receptive);
    }
}

TEST_CASE("binomial identity") {
    for (int n = 1; n <= 12; ++n) {
        for (int i = 0; i <= 10; ++i) {
            const double a = i / 10.0;
            const WorstCaseScenario s{n, -2, 2, 1, 0.1};
            const double sum = oracle::worst_case_binomial(n, a, oracle::reject_prob(1, -2), oracle::reject_prob(1, 2));
            CHECK(std::abs(worst_case_prob(s, a) - sum) <= 1e-12);
        }
    }
}

TEST_CASE("monotonicity") {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
        const double w = worst_case_prob(kReference, i / 100.0);
        CHECK(w > prev);
        prev = w;
    }
    for (double a : {0.0, 0.5, 0.9, 1.0}) {
        double last = 2.0;
        for (int n = 1; n <= 30; ++n) {
            const double w = worst_case_prob({n, -2, 2, 1, 0.1}, a);
            CHECK(w < last);
            last = w;
        }
    }
}

TEST_CASE("tipping point") {
    const double a = tipping_point(kReference);
    CHECK(a == doctest::Approx(0.8864).epsilon(0.0005 / 0.8864));
    CHECK(std::abs(worst_case_prob(kReference, a) - 0.1) <= 1e-9);

    const auto p = group_reject_probs(kReference);
    const double oracle_root = oracle::bisect([&](double x) { return worst_case_prob(kReference, x) - 0.1; }, 0, 1);
    CHECK(std::abs(a - oracle_root) < 1e-12);

    WorstCaseScenario lo = kReference;
    lo.delta = std::pow(p.receptive, 10);
    CHECK(tipping_point(lo) == doctest::Approx(0.0).epsilon(1e-9));
    WorstCaseScenario hi = kReference;
    hi.delta = std::pow(p.rejective, 10);
    CHECK(tipping_point(hi) == doctest::Approx(1.0).epsilon(1e-9));

    WorstCaseScenario unreachable = kReference;
    unreachable.delta = 0.5;
    CHECK(code_of([&] { tipping_point(unreachable); }) == ErrorCode::no_tipping_point);
    unreachable.delta = 1e-12;
    CHECK(code_of([&] { tipping_point(unreachable); }) == ErrorCode::no_tipping_point);

    double prev = -1.0;
    for (int i = 1; i <= 28; ++i) {
        WorstCaseScenario s = kReference;
        s.delta = i / 100.0;
        const double t = tipping_point(s);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("social variant") {
    const SocialParams selfish{1.0, 2.5, 0.5};
    const SocialParams selfless{0.0, 2.5, 0.5};
    const SocialParams unobserved{0.0, 2.5, 0.0};
    const auto base = group_reject_probs(kReference);

    const auto s1 = social_reject_probs(kReference, selfish);
    CHECK(s1.rejective == base.rejective);
    CHECK(s1.receptive == base.receptive);
    const auto r0 = social_reject_probs(kReference, unobserved);
    CHECK(r0.rejective == base.rejective);

    const auto s0 = social_reject_probs(kReference, selfless);
    CHECK(s0.rejective == doctest::Approx(1.0 / (1.0 + std::exp(-0.75))).epsilon(1e-14));
    CHECK(s0.rejective == doctest::Approx(0.6792).epsilon(1e-4));
    CHECK(social_worst_case_prob(kReference, selfless, 1.0) == doctest::Approx(0.0209).epsilon(0.005));

    for (int i = 0; i <= 100; ++i) {
        const double a = i / 100.0;
        CHECK(social_worst_case_prob(kReference, selfish, a) == worst_case_prob(kReference, a));
        CHECK(social_worst_case_prob(kReference, selfless, a) < social_worst_case_prob(kReference, selfish, a));
    }

    WorstCaseScenario feasible = kReference;
    feasible.delta = 0.01;
    CHECK(social_tipping_point(feasible, selfless) > social_tipping_point(feasible, selfish));
}

TEST_CASE("noise reduces to the noiseless case at theta = 0") {
    for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::rademacher}) {
        for (int i = 0; i <= 20; ++i) {
            const double a = i / 20.0;
            CHECK(noisy_worst_case_prob(kReference, {kind, 0.0}, a) == worst_case_prob(kReference, a));
        }
        CHECK(std::abs(noisy_tipping_point(kReference, {kind, 0.0}) - tipping_point(kReference)) <= 1e-9);
    }
}

TEST_CASE("rademacher noise is the two-point average") {
    const WorstCaseScenario one{1, -1.5, 2.0, 1.3, 0.1};
    for (double k : {0.1, 1.0, 4.0}) {
        const double expected = 0.5 * (1 / (1 + std::exp(1.3 * (-1.5 + k))) + 1 / (1 + std::exp(1.3 * (-1.5 - k))));
        CHECK(noisy_worst_case_prob(one, {NoiseKind::rademacher, k}, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    }
    for (int n : {2, 5, 10, 20}) {
        for (double u : {1.0, 2.0, 8.0}) {
            const WorstCaseScenario s{n, -u, u, 1.0, 0.1};
            for (double k : {0.2, 3.0, 10.0}) {
                for (double a : {0.0, 0.3, 0.9, 1.0}) {
                    const double ref = oracle::rademacher_w(as_oracle(s), a, k);
                    CHECK(noisy_worst_case_prob(s, {NoiseKind::rademacher, k}, a) ==
                          doctest::Approx(ref).epsilon(1e-13));
                }
            }
        }
    }
}

TEST_CASE("gaussian noise matches a Simpson oracle") {
    for (int n : {2, 10, 20}) {
        for (double u : {1.0, 2.0, 8.0}) {
            const WorstCaseScenario s{n, -u, u, 1.0, 0.1};
            for (double sigma : {0.2, 1.0, 4.0, 10.0}) {
                for (double a : {0.0, 0.5, 1.0}) {
                    const double ref = oracle::gaussian_w_simpson(as_oracle(s), a, sigma, 40000);
                    const double got = noisy_worst_case_prob(s, {NoiseKind::gaussian, sigma}, a);
                    CAPTURE(n);
                    CAPTURE(u);
                    CAPTURE(sigma);
                    CAPTURE(a);
                    CHECK(std::abs(got - ref) <= 1e-10 * std::max(1.0, ref));
                }
            }
        }
    }
}

TEST_CASE("gaussian noise matches a Monte Carlo oracle at sigma = 1") {
    const auto mc = oracle::gaussian_w_monte_carlo(as_oracle(kReference), 0.5, 1.0, 1'000'000, 99);
    const double got = noisy_worst_case_prob(kReference, {NoiseKind::gaussian, 1.0}, 0.5);
    CHECK(std::abs(got - mc.mean) <= 3 * mc.standard_error);
}

TEST_CASE("the gauss-hermite option stays available and agrees at small sigma") {
    NoiseOptions gh;
    gh.gaussian.method = GaussianMethod::gauss_hermite;
    for (double a : {0.2, 0.8}) {
        const double ref = noisy_worst_case_prob(kReference, {NoiseKind::gaussian, 0.5}, a);
        CHECK(noisy_worst_case_prob(kReference, {NoiseKind::gaussian, 0.5}, a, gh) == doctest::Approx(ref).epsilon(1e-8));
    }
}

TEST_CASE("noisy variants are increasing in alpha") {
    for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::rademacher}) {
        double prev = -1.0;
        for (int i = 0; i <= 50; ++i) {
            const double w = noisy_worst_case_prob(kReference, {kind, 2.0}, i / 50.0);
            CHECK(w > prev);
            prev = w;
        }
    }
}

TEST_CASE("noisy tipping point") {
    const NoiseSpec k10{NoiseKind::rademacher, 1.0};
    const double a = noisy_tipping_point(kReference, k10);
    CHECK(std::abs(noisy_worst_case_prob(kReference, k10, a) - 0.1) <= 1e-10);
    CHECK(noisy_worst_case_prob(kReference, k10, 0.0) < 0.1);
    CHECK(noisy_worst_case_prob(kReference, k10, 1.0) > 0.1);

    const NoiseSpec g1{NoiseKind::gaussian, 1.0};
    const double ag = noisy_tipping_point(kReference, g1);
    CHECK(std::abs(noisy_worst_case_prob(kReference, g1, ag) - 0.1) <= 1e-10);

    WorstCaseScenario unreachable = kReference;
    unreachable.delta = 0.9;
    CHECK(code_of([&] { noisy_tipping_point(unreachable, k10); }) == ErrorCode::no_tipping_point);
}

TEST_CASE("derivatives") {
    SUBCASE("theta derivative is zero at theta = 0") {
        for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::rademacher}) {
            for (double a : {0.0, 0.5, 1.0}) {
                CHECK(std::abs(noisy_dw_dtheta(kReference, {kind, 0.0}, a)) < 1e-12);
            }
        }
    }
    SUBCASE("theta derivative against the oracle") {
        const auto o = as_oracle(kReference);
        for (double k : {0.5, 2.0, 6.0}) {
            for (double a : {0.1, 0.6, 0.95}) {
                const double h = 1e-5;
                const double ref = (oracle::rademacher_w(o, a, k + h) - oracle::rademacher_w(o, a, k - h)) / (2 * h);
                CHECK(noisy_dw_dtheta(kReference, {NoiseKind::rademacher, k}, a) ==
                      doctest::Approx(ref).epsilon(1e-6).scale(1e-9));
            }
        }
    }
    SUBCASE("alpha derivative") {
        const auto p = group_reject_probs(kReference);
        for (double a : {0.0, 0.4, 1.0}) {
            const double exact = 10 * std::pow(a * p.rejective + (1 - a) * p.receptive, 9) * (p.rejective - p.receptive);
            CHECK(noisy_dw_dalpha(kReference, {NoiseKind::gaussian, 0.0}, a) == doctest::Approx(exact).epsilon(1e-3));
        }
    }
    SUBCASE("implicit against direct") {
        for (double k : {0.5, 1.0, 2.0}) {
            const NoiseSpec noise{NoiseKind::rademacher, k};
            const auto g = tipping_point_gradient(kReference, noise);
            const double direct = tipping_point_derivative_direct(kReference, noise, 1e-3);
            CHECK(std::abs(g.dalpha_dtheta - direct) <= 1e-4);
            CHECK(g.dw_dalpha > 0);
            CHECK((g.dalpha_dtheta > 0) == (g.dw_dtheta < 0));
        }
    }
    SUBCASE("gaussian gradient at theta = 0 is finite and reproducible") {
        const WorstCaseScenario sym{10, -2, 2, 1, 0.1};
        const auto first = tipping_point_gradient(sym, {NoiseKind::gaussian, 0.0});
        const auto second = tipping_point_gradient(sym, {NoiseKind::gaussian, 0.0});
        CHECK(std::isfinite(first.dalpha_dtheta));
        CHECK(first.dalpha_dtheta == second.dalpha_dtheta);
    }
    SUBCASE("errors") {
        CHECK(code_of([] { tipping_point_derivative_direct(kReference, {NoiseKind::rademacher, 1e-4}, 1e-3); }) ==
              ErrorCode::invalid_argument);
        WorstCaseScenario unreachable = kReference;
        unreachable.delta = 0.9;
        CHECK(code_of([&] { tipping_point_gradient(unreachable, {NoiseKind::rademacher, 1.0}); }) ==
              ErrorCode::no_tipping_point);
    }
}

TEST_CASE("gradient sign map") {
    const std::vector<int> ns{2, 10};
    const std::vector<double> us{2.0, 8.0};
    const std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> thetas{0.0, 1.0, 3.0, 6.0};

    SUBCASE("rows, ranges and cells") {
        std::vector<GradientCell> cells;
        const auto rows = gradient_sign_map(ns, us, NoiseKind::rademacher, alphas, thetas, {}, &cells);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].n == 2);
        CHECK(rows[0].u_abs == 2.0);
        CHECK(rows[1].u_abs == 8.0);
        CHECK(rows[2].n == 10);
        CHECK(cells.size() == 4 * alphas.size() * thetas.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            CHECK(rows[r].fraction_negative >= 0.0);
            CHECK(rows[r].fraction_negative <= 1.0);
            std::size_t negative = 0;
            for (std::size_t c = 0; c < alphas.size() * thetas.size(); ++c) {
                const auto& cell = cells[r * alphas.size() * thetas.size() + c];
                CHECK(cell.n == rows[r].n);
                negative += cell.dw_dtheta < -1e-12 ? 1 : 0;
            }
            CHECK(rows[r].fraction_negative == static_cast<double>(negative) / (alphas.size() * thetas.size()));
        }
    }
    SUBCASE("a single zero theta gives no negative cells") {
        const std::vector<double> zero{0.0};
        for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::rademacher}) {
            for (const auto& row : gradient_sign_map(ns, us, kind, alphas, zero)) {
                CHECK(row.fraction_negative == 0.0);
            }
        }
    }
    SUBCASE("independent of the thread count") {
        const auto many = gradient_sign_map(ns, us, NoiseKind::gaussian, alphas, thetas);
        ::setenv("PATHFINDER_THREADS", "1", 1);
        const auto one = gradient_sign_map(ns, us, NoiseKind::gaussian, alphas, thetas);
        ::unsetenv("PATHFINDER_THREADS");
        REQUIRE(many.size() == one.size());
        for (std::size_t i = 0; i < one.size(); ++i) {
            CHECK(many[i].fraction_negative == one[i].fraction_negative);
        }
    }
    SUBCASE("independent of the kernel variant") {
        const auto active = gradient_sign_map(ns, us, NoiseKind::gaussian, alphas, thetas);
        kernels::ScopedIsa pin(kernels::Isa::scalar);
        const auto scalar = gradient_sign_map(ns, us, NoiseKind::gaussian, alphas, thetas);
        for (std::size_t i = 0; i < active.size(); ++i) {
            CHECK(active[i].fraction_negative == scalar[i].fraction_negative);
        }
    }
    SUBCASE("empty grids") {
        const std::vector<double> none;
        CHECK(code_of([&] { gradient_sign_map(ns, us, NoiseKind::gaussian, none, thetas); }) == ErrorCode::empty_grid);
        const std::vector<int> no_n;
        CHECK(code_of([&] { gradient_sign_map(no_n, us, NoiseKind::gaussian, alphas, thetas); }) ==
              ErrorCode::empty_grid);
    }
    SUBCASE("csv") {
        const std::vector<int> n2{2};
        const std::vector<double> u8{8.0};
        const auto rows = gradient_sign_map(n2, u8, NoiseKind::rademacher, alphas, thetas);
        const std::string csv = gradient_map_to_csv(rows);
        CHECK(csv.rfind("n,u_abs,noise_kind,fraction_negative\n2,8,rademacher,", 0) == 0);
    }
}
