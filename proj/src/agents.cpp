#include "pathfinder/agents.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "pathfinder/error.hpp"
#include "pathfinder/numeric.hpp"

namespace pathfinder {

namespace {

void check(bool ok, const std::string& what) {
    require(ok, ErrorCode::invalid_argument, what);
}

bool finite_nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void AgentProfile::validate() const {
    check(finite_nonnegative(reward), "agent '" + id + "': reward must be finite and >= 0");
    check(finite_nonnegative(participation_cost), "agent '" + id + "': participation_cost must be finite and >= 0");
    check(finite_nonnegative(failure_cost), "agent '" + id + "': failure_cost must be finite and >= 0");
    check(std::isfinite(beta) && beta > 0.0, "agent '" + id + "': beta must be finite and > 0");
    check(p_success_i >= 0.0 && p_success_i <= 1.0, "agent '" + id + "': p_success_i must lie in [0,1]");
}

void ControllerCandidate::validate() const {
    profile.validate();
    check(epsilon >= 0.0 && epsilon <= 1.0, "agent '" + profile.id + "': epsilon must lie in [0,1]");
}

void ControllerContext::validate() const {
    check(finite_nonnegative(delta_d_ideal), "delta_d_ideal must be finite and >= 0");
}

double utility_accept(const AgentProfile& profile) {
    return profile.reward - profile.participation_cost - (1.0 - profile.p_success_i) * profile.failure_cost;
}

double p_accept(const AgentProfile& profile) { return logistic(profile.beta * utility_accept(profile)); }

double p_reject(const AgentProfile& profile) {
    return logistic_complement(profile.beta * utility_accept(profile));
}

double controller_payoff(const ControllerCandidate& candidate, const ControllerContext& ctx) {
    return p_accept(candidate.profile) * candidate.epsilon * ctx.delta_d_ideal;
}

std::vector<std::string> rank_candidates(std::span<const ControllerCandidate> candidates,
                                         const ControllerContext& ctx) {
    require(!candidates.empty(), ErrorCode::empty_candidate_set, "no candidates to rank");
    std::set<std::string_view> seen;
    for (const auto& c : candidates) {
        require(seen.insert(c.profile.id).second, ErrorCode::duplicate_id,
                "duplicate candidate id '" + c.profile.id + "'");
    }

    struct Scored {
        double payoff;
        const std::string* id;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) {
        scored.push_back({controller_payoff(c, ctx), &c.profile.id});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& lhs, const Scored& rhs) {
        if (lhs.payoff != rhs.payoff) {
            return lhs.payoff > rhs.payoff;
        }
        return *lhs.id < *rhs.id;
    });

    std::vector<std::string> ids;
    ids.reserve(scored.size());
    for (const auto& s : scored) {
        ids.push_back(*s.id);
    }
    return ids;
}

AgentProfile profile_with_utility(std::string id, double utility, double beta) {
    AgentProfile p;
    p.id = std::move(id);
    p.beta = beta;
    if (utility >= 0.0) {
        p.reward = utility;
    } else {
        p.participation_cost = -utility;
    }
    return p;
}

namespace {

const std::set<std::string> kProfileKeys{"id", "reward", "participation_cost", "failure_cost", "beta",
                                         "p_success_i"};

std::string record_prefix(std::size_t index) { return "record " + std::to_string(index) + ": "; }

AgentProfile parse_profile(const nlohmann::json& obj, std::size_t index) {
    const auto prefix = record_prefix(index);
    require(obj.is_object(), ErrorCode::parse_error, prefix + "expected an object");
    for (const auto& [key, value] : obj.items()) {
        require(kProfileKeys.count(key) == 1, ErrorCode::parse_error, prefix + "unknown field '" + key + "'");
    }
    for (const auto& key : kProfileKeys) {
        require(obj.contains(key), ErrorCode::parse_error, prefix + "missing field '" + key + "'");
        if (key == "id") {
            require(obj[key].is_string() || obj[key].is_number_integer(), ErrorCode::parse_error,
                    prefix + "field 'id' must be a string or integer");
        } else {
            require(obj[key].is_number(), ErrorCode::parse_error, prefix + "field '" + key + "' must be a number");
        }
    }
    AgentProfile p;
    p.id = obj["id"].is_string() ? obj["id"].get<std::string>() : std::to_string(obj["id"].get<long long>());
    p.reward = obj["reward"].get<double>();
    p.participation_cost = obj["participation_cost"].get<double>();
    p.failure_cost = obj["failure_cost"].get<double>();
    p.beta = obj["beta"].get<double>();
    p.p_success_i = obj["p_success_i"].get<double>();
    try {
        p.validate();
    } catch (const Error& e) {
        fail(ErrorCode::parse_error, prefix + e.what());
    }
    return p;
}

}  // namespace

std::vector<AgentProfile> profiles_from_json(const nlohmann::json& doc) {
    require(doc.is_array(), ErrorCode::parse_error, "agent profile document must be a JSON array");
    std::vector<AgentProfile> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        out.push_back(parse_profile(doc[i], i));
    }
    return out;
}

std::vector<ControllerCandidate> candidates_from_json(const nlohmann::json& doc) {
    require(doc.is_array(), ErrorCode::parse_error, "candidate document must be a JSON array");
    std::vector<ControllerCandidate> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        const auto prefix = record_prefix(i);
        require(obj.is_object(), ErrorCode::parse_error, prefix + "expected an object");
        for (const auto& [key, value] : obj.items()) {
            require(key == "profile" || key == "epsilon", ErrorCode::parse_error,
                    prefix + "unknown field '" + key + "'");
        }
        require(obj.contains("profile"), ErrorCode::parse_error, prefix + "missing field 'profile'");
        require(obj.contains("epsilon") && obj["epsilon"].is_number(), ErrorCode::parse_error,
                prefix + "field 'epsilon' must be a number");
        ControllerCandidate c{parse_profile(obj["profile"], i), obj["epsilon"].get<double>()};
        require(c.epsilon >= 0.0 && c.epsilon <= 1.0, ErrorCode::parse_error,
                prefix + "epsilon must lie in [0,1]");
        out.push_back(std::move(c));
    }
    return out;
}

nlohmann::json to_json(const AgentProfile& p) {
    return {{"id", p.id},
            {"reward", p.reward},
            {"participation_cost", p.participation_cost},
            {"failure_cost", p.failure_cost},
            {"beta", p.beta},
            {"p_success_i", p.p_success_i}};
}

nlohmann::json to_json(const ControllerCandidate& c) { return {{"profile", to_json(c.profile)}, {"epsilon", c.epsilon}}; }

}  // namespace pathfinder
