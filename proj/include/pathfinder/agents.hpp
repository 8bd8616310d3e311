#pragma once

// Flight-centric acceptance model and controller-centric payoff ranking.
//
// Utilities are dimensionless. The acceptance probability is always the
// logistic evaluated at the utility of accepting; declining has utility 0.

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace pathfinder {

struct AgentProfile {
    std::string id;
    double reward = 0.0;              // T_i >= 0
    double participation_cost = 0.0;  // c_i >= 0
    double failure_cost = 0.0;        // d_i >= 0
    double beta = 1.0;                // > 0
    double p_success_i = 1.0;         // [0,1]

    /// Throws invalid_argument naming the violated field.
    void validate() const;
};

struct ControllerCandidate {
    AgentProfile profile;
    double epsilon = 1.0;  // [0,1]

    void validate() const;
};

struct ControllerContext {
    double delta_d_ideal = 0.0;  // >= 0

    void validate() const;
};

/// T - c - (1 - p_success_i) d
double utility_accept(const AgentProfile& profile);

double p_accept(const AgentProfile& profile);

/// Evaluated as 1/(1+exp(beta U)) directly, not as 1 - p_accept.
double p_reject(const AgentProfile& profile);

double controller_payoff(const ControllerCandidate& candidate, const ControllerContext& ctx);

/// Ids ordered by payoff descending, ties by ascending id.
/// Throws empty_candidate_set or duplicate_id.
std::vector<std::string> rank_candidates(std::span<const ControllerCandidate> candidates,
                                         const ControllerContext& ctx);

/// A profile whose utility_accept equals `utility` exactly (reward or
/// participation cost carries the value, no failure cost).
AgentProfile profile_with_utility(std::string id, double utility, double beta);

// JSON I/O. Arrays of objects using the field names above; a candidate is
// {"profile": {...}, "epsilon": x}. Errors name the offending record index.
std::vector<AgentProfile> profiles_from_json(const nlohmann::json& doc);
std::vector<ControllerCandidate> candidates_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const AgentProfile& profile);
nlohmann::json to_json(const ControllerCandidate& candidate);

}  // namespace pathfinder
