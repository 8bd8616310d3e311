#include <doctest.h>

#include <cstdlib>
#include <random>

#include "pathfinder/error.hpp"
#include "pathfinder/sim.hpp"

using namespace pathfinder;

TEST_CASE("splitmix64 reference outputs") {
    // First outputs for seed 0 and seed 1234567 from the published algorithm.
    SplitMix64 zero(0);
    CHECK(zero() == 0xe220a8397b1dcdafULL);
    CHECK(zero() == 0x6e789e6aa1b965f4ULL);
    CHECK(zero() == 0x06c45d188009454fULL);
    SplitMix64 other(1234567);
    CHECK(other() == 6457827717110365317ULL);
    CHECK(other() == 3203168211198807973ULL);
}

TEST_CASE("random access matches sequential draws") {
    SplitMix64 rng(42);
    for (std::uint64_t i = 0; i < 100; ++i) {
        CHECK(rng() == SplitMix64::at(42, i));
    }
    SplitMix64 a = SplitMix64::substream(42, 7);
    SplitMix64 b(SplitMix64::at(42, 7));
    for (int i = 0; i < 10; ++i) {
        CHECK(a() == b());
    }
}

TEST_CASE("uniform draws lie in [0,1) and work with std distributions") {
    SplitMix64 rng(5);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
    std::uniform_int_distribution<int> d(1, 6);
    CHECK(d(rng) >= 1);
}

TEST_CASE("chain simulation") {
    SUBCASE("hand-solved chain") {
        const auto occ = simulate_chain(ChainParams(0.5, 1.0, 1.0), {17, 1'000'000, 1'000});
        const double pi[] = {1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3};
        double total = 0.0;
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(occ[i] - pi[i]) <= 0.01);
            total += occ[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("closed gate never opens") {
        const auto occ = simulate_chain(ChainParams(0.0, 0.5, 0.5), {3, 10'000, 100});
        CHECK(occ == Occupancy{1, 0, 0, 0});
    }
    SUBCASE("deterministic per seed") {
        const SimConfig cfg{99, 200'000, 10};
        const ChainParams params(0.3, 0.6, 0.7);
        CHECK(simulate_chain(params, cfg) == simulate_chain(params, cfg));
        CHECK(simulate_chain(params, cfg) != simulate_chain(params, {100, 200'000, 10}));
    }
    SUBCASE("config validation") {
        CHECK_THROWS_AS(simulate_chain(ChainParams(0.3, 0.6, 0.7), {1, 10, 10}), Error);
        CHECK_THROWS_AS(simulate_chain(ChainParams(0.3, 0.6, 0.7), {1, 0, 0}), Error);
    }
}

namespace {

ControllerCandidate candidate(const std::string& id, double utility, double epsilon = 1.0) {
    return {profile_with_utility(id, utility, 1.0), epsilon};
}

}  // namespace

TEST_CASE("selection rounds") {
    const ControllerContext ctx{1.0};
    SUBCASE("a near-certain accepter takes the first offer") {
        const std::vector<ControllerCandidate> one{candidate("UAL1", 20.0)};
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            const auto out = run_selection_round(one, ctx, seed);
            REQUIRE(out.accepted_by);
            CHECK(*out.accepted_by == "UAL1");
            CHECK(out.offers_made == 1);
        }
    }
    SUBCASE("strongly rejective groups almost never accept") {
        std::vector<ControllerCandidate> group;
        for (int i = 0; i < 5; ++i) {
            group.push_back(candidate("f" + std::to_string(i), -20.0));
        }
        int accepted = 0;
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            const auto out = run_selection_round(group, ctx, seed);
            accepted += out.accepted_by ? 1 : 0;
            if (!out.accepted_by) {
                CHECK(out.offers_made == group.size());
            }
        }
        CHECK(accepted == 0);
    }
    SUBCASE("offers follow the ranking and stop at the first acceptance") {
        const std::vector<ControllerCandidate> group{candidate("c", 0.0, 0.2), candidate("a", 0.0, 0.9),
                                                     candidate("b", 0.0, 0.5)};
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            const auto out = run_selection_round(group, ctx, seed);
            CHECK(out.order_used == std::vector<std::string>{"a", "b", "c"});
            CHECK(out.offers_made <= out.order_used.size());
            if (out.accepted_by) {
                CHECK(*out.accepted_by == out.order_used[out.offers_made - 1]);
            }
            const auto again = run_selection_round(group, ctx, seed);
            CHECK(again.accepted_by == out.accepted_by);
            CHECK(again.offers_made == out.offers_made);
        }
    }
    SUBCASE("empirical all-reject rate of a fixed group") {
        const std::vector<ControllerCandidate> group{candidate("a", -1.0), candidate("b", 0.5), candidate("c", -0.3)};
        double expected = 1.0;
        for (const auto& c : group) {
            expected *= p_reject(c.profile);
        }
        const auto summary = run_selection_rounds(group, ctx, 100'000, 8);
        const double se = std::sqrt(expected * (1 - expected) / 100'000);
        CHECK(std::abs(summary.all_reject_rate - expected) <= 3 * se);
        CHECK(summary.mean_offers >= 1.0);
        CHECK(summary.mean_offers <= 3.0);
    }
    SUBCASE("empty candidate set") {
        const std::vector<ControllerCandidate> none;
        CHECK_THROWS_AS(run_selection_round(none, ctx, 1), Error);
    }
}

TEST_CASE("mixture experiment converges to the closed form") {
    for (int n : {2, 5, 10}) {
        for (double alpha : {0.3, 0.9}) {
            const WorstCaseScenario scn{n, -2.0, 2.0, 1.0, 0.1};
            const auto summary = run_mixture_rounds(scn, alpha, 100'000, 1000 + n);
            const double w = worst_case_prob(scn, alpha);
            const double se = std::sqrt(w * (1 - w) / 100'000);
            CAPTURE(n);
            CAPTURE(alpha);
            // 99% binomial interval
            CHECK(std::abs(summary.all_reject_rate - w) <= 2.576 * se + 1e-12);
        }
    }
}

TEST_CASE("parallel and serial runs agree") {
    const WorstCaseScenario scn{5, -2.0, 2.0, 1.0, 0.1};
    const auto parallel = run_mixture_rounds(scn, 0.5, 50'000, 77);
    ::setenv("PATHFINDER_THREADS", "1", 1);
    const auto serial = run_mixture_rounds(scn, 0.5, 50'000, 77);
    ::unsetenv("PATHFINDER_THREADS");
    CHECK(parallel.all_reject_count == serial.all_reject_count);
    CHECK(parallel.mean_offers == serial.mean_offers);
    CHECK(selection_summary_json(parallel) == selection_summary_json(serial));
}

TEST_CASE("summary json") {
    const SimConfig cfg{4, 1000, 10};
    const auto j = chain_summary_json(cfg, Occupancy{0.1, 0.2, 0.3, 0.4});
    CHECK(j["seed"] == 4);
    CHECK(j["steps"] == 1000);
    CHECK(j["burn_in"] == 10);
    CHECK(j["occupancy"].size() == 4);
    SelectionSummary s;
    s.seed = 1;
    s.rounds = 10;
    s.all_reject_rate = 0.5;
    s.mean_offers = 2.0;
    const auto k = selection_summary_json(s);
    CHECK(k.size() == 4);
    CHECK(k["all_reject_rate"] == 0.5);
}
