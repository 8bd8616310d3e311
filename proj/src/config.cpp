#include "pathfinder/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "pathfinder/error.hpp"
#include "pathfinder/io.hpp"
#include "pathfinder/markov.hpp"
#include "pathfinder/numeric.hpp"

namespace pathfinder {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
    fail(ErrorCode::config_invalid, "config: '" + key + "' " + what);
}

// Walks an object, dispatching each member to its handler; a member with no
// handler is an unknown key.
void for_each_key(const json& section, const std::string& path,
                  const std::map<std::string, std::function<void(const json&, const std::string&)>>& handlers) {
    if (!section.is_object()) {
        bad(path, "must be an object");
    }
    for (const auto& [key, value] : section.items()) {
        const std::string full = path.empty() ? key : path + "." + key;
        const auto it = handlers.find(key);
        if (it == handlers.end()) {
            fail(ErrorCode::config_invalid, "config: unknown key '" + full + "'");
        }
        it->second(value, full);
    }
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) {
        bad(key, "must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        bad(key, "must be finite");
    }
    return x;
}

std::uint64_t count(const json& v, const std::string& key) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        bad(key, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

int integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) {
        bad(key, "must be an integer");
    }
    return v.get<int>();
}

std::vector<double> grid(const json& v, const std::string& key) {
    std::vector<double> out;
    if (v.is_number()) {
        out.push_back(number(v, key));
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(number(v[i], key + "[" + std::to_string(i) + "]"));
        }
    } else if (v.is_object()) {
        std::optional<double> lo, hi, step;
        for_each_key(v, key, {{"lo", [&](const json& x, const std::string& k) { lo = number(x, k); }},
                              {"hi", [&](const json& x, const std::string& k) { hi = number(x, k); }},
                              {"step", [&](const json& x, const std::string& k) { step = number(x, k); }}});
        if (!lo || !hi || !step) {
            bad(key, "range needs lo, hi and step");
        }
        try {
            out = linspace_step(*lo, *hi, *step);
        } catch (const Error& e) {
            bad(key, e.what());
        }
    } else {
        bad(key, "must be a number, a list of numbers or {lo, hi, step}");
    }
    if (out.empty()) {
        bad(key, "grid is empty");
    }
    return out;
}

void check_probabilities(const std::vector<double>& values, const std::string& key) {
    for (double x : values) {
        if (x < 0.0 || x > 1.0) {
            bad(key, "values must lie in [0,1]");
        }
    }
}

// Re-runs a module validator and reports its message under the section name.
template <typename Fn>
void revalidate(const std::string& section, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        bad(section, e.what());
    }
}

ChainSection parse_chain(const json& v) {
    ChainSection c;
    for_each_key(v, "chain", {{"p_good", [&](const json& x, const std::string& k) { c.p_good = grid(x, k); }},
                              {"p_accept", [&](const json& x, const std::string& k) { c.p_accept = grid(x, k); }},
                              {"p_success", [&](const json& x, const std::string& k) { c.p_success = grid(x, k); }}});
    check_probabilities(c.p_good, "chain.p_good");
    check_probabilities(c.p_accept, "chain.p_accept");
    check_probabilities(c.p_success, "chain.p_success");
    return c;
}

WorstCaseSection parse_worst_case(const json& v) {
    WorstCaseSection w;
    WorstCaseScenario& s = w.scenario;
    for_each_key(v, "worst_case", {{"n", [&](const json& x, const std::string& k) { s.n = integer(x, k); }},
                                   {"u_minus", [&](const json& x, const std::string& k) { s.u_minus = number(x, k); }},
                                   {"u_plus", [&](const json& x, const std::string& k) { s.u_plus = number(x, k); }},
                                   {"beta", [&](const json& x, const std::string& k) { s.beta = number(x, k); }},
                                   {"delta", [&](const json& x, const std::string& k) { s.delta = number(x, k); }},
                                   {"alpha", [&](const json& x, const std::string& k) { w.alpha = grid(x, k); }}});
    revalidate("worst_case", [&] { s.validate(); });
    check_probabilities(w.alpha, "worst_case.alpha");
    return w;
}

SocialParams parse_social(const json& v) {
    SocialParams p;
    for_each_key(v, "social", {{"s", [&](const json& x, const std::string& k) { p.s = number(x, k); }},
                               {"gamma", [&](const json& x, const std::string& k) { p.gamma = number(x, k); }},
                               {"r", [&](const json& x, const std::string& k) { p.r = number(x, k); }}});
    revalidate("social", [&] { p.validate(); });
    return p;
}

NoiseSection parse_noise(const json& v) {
    NoiseSection n;
    bool have_theta = false;
    auto kind = [](const json& x, const std::string& k) {
        if (!x.is_string()) {
            bad(k, "must be \"gaussian\" or \"rademacher\"");
        }
        try {
            return noise_kind_from_string(x.get<std::string>());
        } catch (const Error& e) {
            bad(k, e.what());
        }
    };
    auto theta = [&](const json& x, const std::string& k) {
        if (have_theta) {
            bad(k, "duplicates the theta grid (give theta or grid, not both)");
        }
        have_theta = true;
        n.theta = grid(x, k);
    };
    for_each_key(v, "noise", {{"kind",
                               [&](const json& x, const std::string& k) {
                                   if (x.is_array()) {
                                       for (std::size_t i = 0; i < x.size(); ++i) {
                                           n.kinds.push_back(kind(x[i], k + "[" + std::to_string(i) + "]"));
                                       }
                                   } else {
                                       n.kinds.push_back(kind(x, k));
                                   }
                               }},
                              {"theta", theta},
                              {"grid", theta}});
    if (n.kinds.empty()) {
        bad("noise.kind", "is required");
    }
    if (!have_theta) {
        bad("noise.theta", "is required");
    }
    for (double t : n.theta) {
        revalidate("noise.theta", [&] { NoiseSpec{n.kinds.front(), t}.validate(); });
    }
    return n;
}

SimSection parse_sim(const json& v) {
    SimSection s;
    for_each_key(v, "sim",
                 {{"seed", [&](const json& x, const std::string& k) { s.seed = count(x, k); }},
                  {"steps", [&](const json& x, const std::string& k) { s.steps = count(x, k); }},
                  {"burn_in", [&](const json& x, const std::string& k) { s.burn_in = count(x, k); }},
                  {"rounds", [&](const json& x, const std::string& k) { s.rounds = count(x, k); }},
                  {"alpha", [&](const json& x, const std::string& k) { s.alpha = number(x, k); }},
                  {"delta_d_ideal", [&](const json& x, const std::string& k) { s.delta_d_ideal = number(x, k); }},
                  {"candidates", [&](const json& x, const std::string& k) {
                       try {
                           s.candidates = candidates_from_json(x);
                       } catch (const Error& e) {
                           bad(k, e.what());
                       }
                   }}});
    if (s.steps == 0 || s.burn_in >= s.steps) {
        bad("sim", "needs steps > 0 and burn_in < steps");
    }
    if (s.rounds == 0) {
        bad("sim.rounds", "must be positive");
    }
    if (s.alpha && (*s.alpha < 0.0 || *s.alpha > 1.0)) {
        bad("sim.alpha", "must lie in [0,1]");
    }
    revalidate("sim.delta_d_ideal", [&] { ControllerContext{s.delta_d_ideal}.validate(); });
    return s;
}

GradmapSection parse_gradmap(const json& v) {
    GradmapSection g;
    for_each_key(v, "gradmap",
                 {{"n",
                   [&](const json& x, const std::string& k) {
                       g.n.clear();
                       if (x.is_array()) {
                           for (std::size_t i = 0; i < x.size(); ++i) {
                               g.n.push_back(integer(x[i], k + "[" + std::to_string(i) + "]"));
                           }
                       } else {
                           g.n.push_back(integer(x, k));
                       }
                   }},
                  {"u_abs", [&](const json& x, const std::string& k) { g.u_abs = grid(x, k); }},
                  {"alpha", [&](const json& x, const std::string& k) { g.alpha = grid(x, k); }},
                  {"beta", [&](const json& x, const std::string& k) { g.beta = number(x, k); }}});
    if (g.n.empty()) {
        bad("gradmap.n", "grid is empty");
    }
    for (int n : g.n) {
        if (n < 1) {
            bad("gradmap.n", "values must be >= 1");
        }
    }
    for (double u : g.u_abs) {
        if (!(u > 0.0)) {
            bad("gradmap.u_abs", "values must be > 0");
        }
    }
    if (!(g.beta > 0.0)) {
        bad("gradmap.beta", "must be > 0");
    }
    check_probabilities(g.alpha, "gradmap.alpha");
    return g;
}

}  // namespace

ScenarioFile ScenarioFile::from_json(const nlohmann::json& doc) {
    ScenarioFile f;
    for_each_key(doc, "", {{"chain", [&](const json& x, const std::string&) { f.chain = parse_chain(x); }},
                           {"worst_case", [&](const json& x, const std::string&) { f.worst_case = parse_worst_case(x); }},
                           {"social", [&](const json& x, const std::string&) { f.social = parse_social(x); }},
                           {"noise", [&](const json& x, const std::string&) { f.noise = parse_noise(x); }},
                           {"sim", [&](const json& x, const std::string&) { f.sim = parse_sim(x); }},
                           {"gradmap", [&](const json& x, const std::string&) { f.gradmap = parse_gradmap(x); }}});
    return f;
}

ScenarioFile ScenarioFile::from_file(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        fail(ErrorCode::config_invalid, e.what());
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::config_invalid, "config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

std::vector<double> default_gradmap_theta() { return linspace_step(0.0, 10.0, 0.2); }

}  // namespace pathfinder
