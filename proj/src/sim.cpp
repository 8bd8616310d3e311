#include "pathfinder/sim.hpp"

#include <algorithm>
#include <cstdio>

#include "pathfinder/error.hpp"
#include "pathfinder/numeric.hpp"

namespace pathfinder {

void SimConfig::validate() const {
    require(steps > 0, ErrorCode::invalid_argument, "sim steps must be positive");
    require(burn_in < steps, ErrorCode::invalid_argument, "sim burn_in must be smaller than steps");
}

Occupancy simulate_chain(const ChainParams& params, const SimConfig& cfg) {
    cfg.validate();
    const TransitionMatrix matrix = build_transition_matrix(params);

    std::array<Row, kNumStates> cumulative{};
    for (int i = 0; i < kNumStates; ++i) {
        double acc = 0.0;
        for (int j = 0; j < kNumStates; ++j) {
            acc += matrix(i, j);
            cumulative[i][j] = acc;
        }
        cumulative[i][kNumStates - 1] = 1.0;
    }

    SplitMix64 rng(cfg.seed);
    std::array<std::uint64_t, kNumStates> visits{};
    int state = static_cast<int>(GateState::closed);
    for (std::uint64_t step = 1; step <= cfg.steps; ++step) {
        const double u = rng.uniform();
        int next = 0;
        while (u >= cumulative[state][next]) {
            ++next;
        }
        state = next;
        if (step > cfg.burn_in) {
            ++visits[state];
        }
    }

    const double kept = static_cast<double>(cfg.steps - cfg.burn_in);
    Occupancy out{};
    for (int i = 0; i < kNumStates; ++i) {
        out[i] = static_cast<double>(visits[i]) / kept;
    }
    return out;
}

SelectionOutcome run_selection_round(std::span<const ControllerCandidate> candidates, const ControllerContext& ctx,
                                     std::uint64_t seed) {
    SelectionOutcome outcome;
    outcome.order_used = rank_candidates(candidates, ctx);

    SplitMix64 rng(seed);
    for (const auto& id : outcome.order_used) {
        const auto it = std::find_if(candidates.begin(), candidates.end(),
                                     [&id](const ControllerCandidate& c) { return c.profile.id == id; });
        ++outcome.offers_made;
        if (rng.uniform() < p_accept(it->profile)) {
            outcome.accepted_by = id;
            break;
        }
    }
    return outcome;
}

namespace {

// Rounds are split into fixed blocks; per-block integer tallies are summed
// in block order, so the thread count never changes the result.
template <typename RoundFn>
SelectionSummary tally_rounds(std::uint64_t rounds, std::uint64_t seed, RoundFn round) {
    require(rounds > 0, ErrorCode::invalid_argument, "number of rounds must be positive");
    constexpr std::uint64_t kBlock = 4096;
    const std::uint64_t blocks = (rounds + kBlock - 1) / kBlock;
    std::vector<std::uint64_t> rejects(blocks);
    std::vector<std::uint64_t> offers(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        const std::uint64_t end = std::min<std::uint64_t>(rounds, (b + 1) * kBlock);
        for (std::uint64_t i = b * kBlock; i < end; ++i) {
            const SelectionOutcome outcome = round(i);
            offers[b] += outcome.offers_made;
            if (!outcome.accepted_by) {
                ++rejects[b];
            }
        }
    });

    SelectionSummary summary;
    summary.seed = seed;
    summary.rounds = rounds;
    std::uint64_t total_offers = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) {
        summary.all_reject_count += rejects[b];
        total_offers += offers[b];
    }
    summary.all_reject_rate = static_cast<double>(summary.all_reject_count) / static_cast<double>(rounds);
    summary.mean_offers = static_cast<double>(total_offers) / static_cast<double>(rounds);
    return summary;
}

}  // namespace

SelectionSummary run_selection_rounds(std::span<const ControllerCandidate> candidates, const ControllerContext& ctx,
                                      std::uint64_t rounds, std::uint64_t seed) {
    rank_candidates(candidates, ctx);  // surface empty/duplicate errors before spawning work
    return tally_rounds(rounds, seed, [&](std::uint64_t i) {
        return run_selection_round(candidates, ctx, SplitMix64::at(seed, i));
    });
}

SelectionSummary run_mixture_rounds(const WorstCaseScenario& scn, double alpha, std::uint64_t rounds,
                                    std::uint64_t seed) {
    scn.validate();
    require(alpha >= 0.0 && alpha <= 1.0, ErrorCode::invalid_argument, "alpha must lie in [0,1]");
    const ControllerContext ctx{1.0};
    return tally_rounds(rounds, seed, [&](std::uint64_t i) {
        SplitMix64 rng = SplitMix64::substream(seed, i);
        std::vector<ControllerCandidate> group;
        group.reserve(static_cast<std::size_t>(scn.n));
        for (int k = 0; k < scn.n; ++k) {
            char id[24];
            std::snprintf(id, sizeof id, "agent%04d", k);
            const bool rejective = rng.uniform() < alpha;
            group.push_back({profile_with_utility(id, rejective ? scn.u_minus : scn.u_plus, scn.beta), 1.0});
        }
        return run_selection_round(group, ctx, rng());
    });
}

nlohmann::json chain_summary_json(const SimConfig& cfg, const Occupancy& occupancy) {
    return {{"seed", cfg.seed}, {"steps", cfg.steps}, {"burn_in", cfg.burn_in}, {"occupancy", occupancy}};
}

nlohmann::json selection_summary_json(const SelectionSummary& summary) {
    return {{"seed", summary.seed},
            {"rounds", summary.rounds},
            {"all_reject_rate", summary.all_reject_rate},
            {"mean_offers", summary.mean_offers}};
}

}  // namespace pathfinder
