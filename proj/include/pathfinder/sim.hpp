#pragma once

// Seeded Monte Carlo: chain trajectories and the sequential offer protocol.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathfinder/agents.hpp"
#include "pathfinder/markov.hpp"
#include "pathfinder/worst_case.hpp"

namespace pathfinder {

/// SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
/// generators", 2014). The k-th output of a stream seeded with s is
/// mix64(s + k * 0x9e3779b97f4a7c15), so any position of a stream can be
/// computed directly; substreams are seeded from such positions.
/// Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        state_ += kGamma;
        return mix64(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Output number `index` (0-based) of the stream seeded with `seed`.
    static std::uint64_t at(std::uint64_t seed, std::uint64_t index) noexcept {
        return mix64(seed + (index + 1) * kGamma);
    }

    /// Independent stream number `index` derived from `seed`.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
        return SplitMix64(at(seed, index));
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

struct SimConfig {
    std::uint64_t seed = 0;
    std::uint64_t steps = 1'000'000;
    std::uint64_t burn_in = 1'000;

    void validate() const;
};

using Occupancy = std::array<double, kNumStates>;

/// Starts in Gate Closed, performs cfg.steps transitions and returns the
/// visit frequencies of the states reached after the first burn_in steps.
Occupancy simulate_chain(const ChainParams& params, const SimConfig& cfg);

struct SelectionOutcome {
    std::optional<std::string> accepted_by;
    std::size_t offers_made = 0;
    std::vector<std::string> order_used;
};

/// Offers go out in rank_candidates order until the first acceptance.
/// No accepted_by means every candidate rejected (offers_made == size).
SelectionOutcome run_selection_round(std::span<const ControllerCandidate> candidates, const ControllerContext& ctx,
                                     std::uint64_t seed);

struct SelectionSummary {
    std::uint64_t seed = 0;
    std::uint64_t rounds = 0;
    std::uint64_t all_reject_count = 0;
    double all_reject_rate = 0.0;
    double mean_offers = 0.0;
};

/// Repeats run_selection_round over a fixed candidate list; round i uses
/// substream i of `seed`.
SelectionSummary run_selection_rounds(std::span<const ControllerCandidate> candidates, const ControllerContext& ctx,
                                      std::uint64_t rounds, std::uint64_t seed);

/// Alpha-mixture experiment: every round draws scn.n fresh agents, each
/// rejective (utility u_minus) with probability alpha, receptive otherwise,
/// all with sensitivity scn.beta, then runs one selection round. The
/// all-reject rate estimates W(alpha).
SelectionSummary run_mixture_rounds(const WorstCaseScenario& scn, double alpha, std::uint64_t rounds,
                                    std::uint64_t seed);

nlohmann::json chain_summary_json(const SimConfig& cfg, const Occupancy& occupancy);
nlohmann::json selection_summary_json(const SelectionSummary& summary);

}  // namespace pathfinder
