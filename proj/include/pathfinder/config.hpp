#pragma once

// Scenario files for the command-line tool.
//
//   {
//     "chain":      {"p_good": G, "p_accept": G, "p_success": G},
//     "worst_case": {"n": 10, "u_minus": -2, "u_plus": 2, "beta": 1, "delta": 0.1, "alpha": G},
//     "social":     {"s": 0, "gamma": 2.5, "r": 0.5},
//     "noise":      {"kind": "gaussian" | ["gaussian", "rademacher"], "theta": G},
//     "sim":        {"seed": 1, "steps": 1000000, "burn_in": 1000, "rounds": 100000,
//                    "alpha": 0.5, "candidates": [...], "delta_d_ideal": 1},
//     "gradmap":    {"n": [2, 5], "u_abs": [1, 2], "alpha": G, "beta": 1}
//   }
//
// G is a grid: a number, a list of numbers, or {"lo": x, "hi": y, "step": z}.
// Every section is optional; unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pathfinder/agents.hpp"
#include "pathfinder/numeric.hpp"
#include "pathfinder/worst_case.hpp"

namespace pathfinder {

struct ChainSection {
    std::vector<double> p_good = linspace_step(0.05, 1.0, 0.05);
    std::vector<double> p_accept = linspace_step(0.05, 1.0, 0.05);
    std::vector<double> p_success{0.1, 1.0};
};

struct WorstCaseSection {
    WorstCaseScenario scenario;
    std::vector<double> alpha = linspace_step(0.0, 1.0, 0.01);
};

struct NoiseSection {
    std::vector<NoiseKind> kinds;
    std::vector<double> theta;
};

struct SimSection {
    std::uint64_t seed = 0;
    std::uint64_t steps = 1'000'000;
    std::uint64_t burn_in = 1'000;
    std::uint64_t rounds = 100'000;
    std::optional<double> alpha;
    std::vector<ControllerCandidate> candidates;
    double delta_d_ideal = 1.0;
};

struct GradmapSection {
    std::vector<int> n{2, 5, 10, 20};
    std::vector<double> u_abs{1.0, 2.0, 4.0, 8.0};
    std::vector<double> alpha = linspace_step(0.0, 1.0, 0.02);
    double beta = 1.0;
};

struct ScenarioFile {
    std::optional<ChainSection> chain;
    std::optional<WorstCaseSection> worst_case;
    std::optional<SocialParams> social;
    std::optional<NoiseSection> noise;
    std::optional<SimSection> sim;
    std::optional<GradmapSection> gradmap;

    /// Throws config_invalid naming the offending key.
    static ScenarioFile from_json(const nlohmann::json& doc);
    static ScenarioFile from_file(const std::filesystem::path& path);
};

/// Default theta grid of the gradient map, 0:10:0.2.
std::vector<double> default_gradmap_theta();

}  // namespace pathfinder
