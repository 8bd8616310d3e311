// pathfinder: command-line front end.
//
// Exit status: 0 success, 2 usage or configuration error, 3 computation or
// data error. Failures print one line to stderr:
//   pathfinder-error: <code>: <message>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathfinder/agents.hpp"
#include "pathfinder/config.hpp"
#include "pathfinder/error.hpp"
#include "pathfinder/io.hpp"
#include "pathfinder/markov.hpp"
#include "pathfinder/ntml.hpp"
#include "pathfinder/numeric.hpp"
#include "pathfinder/sim.hpp"
#include "pathfinder/worst_case.hpp"

namespace {

using namespace pathfinder;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitCompute = 3;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";

    // classify
    std::string input;
    std::string rules;
    std::string summary;
    bool calibrate = false;
    std::string g_grid = "0.1:0.9:0.1";
    std::string steady_out;

    // simulate
    bool compare = false;
    std::string sim_format = "json";

    // gradmap
    std::string cells;

    // rank
    std::string candidates;
    double delta_d = 1.0;

    // synth
    std::size_t count = 50;
};

// Anything thrown while reading configuration or flags is a usage error.
template <typename Fn>
auto as_usage(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config_invalid) {
            throw;
        }
        fail(ErrorCode::config_invalid, e.what());
    }
}

ScenarioFile load_config(const Options& opt) {
    if (opt.config.empty()) {
        fail(ErrorCode::config_invalid, "--config is required");
    }
    return ScenarioFile::from_file(opt.config);
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        std::cout.flush();
    } else {
        write_file_atomic(path, content);
    }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string csv_optional(const std::optional<double>& x) { return x ? format_float(*x) : std::string(); }

// --- steady ------------------------------------------------------------------

void cmd_steady(const Options& opt) {
    const ScenarioFile cfg = load_config(opt);
    if (!cfg.chain) {
        fail(ErrorCode::config_invalid, "config: missing 'chain' section");
    }
    const auto rows = sweep_steady_state(cfg.chain->p_good, cfg.chain->p_accept, cfg.chain->p_success);
    const bool any_unique = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.state.has_value(); });
    require(any_unique, ErrorCode::non_unique_stationary, "every grid cell has a non-unique stationary distribution");

    if (opt.format == "json") {
        json doc = json::array();
        for (const auto& r : rows) {
            doc.push_back({{"p_good", r.p_good},
                           {"p_accept", r.p_accept},
                           {"p_success", r.p_success},
                           {"pi", r.state ? json(r.state->pi) : json(nullptr)},
                           {"status", r.state ? "ok" : "non_unique"}});
        }
        emit(opt.out, dump(doc));
    } else {
        emit(opt.out, sweep_to_csv(rows));
    }
}

// --- worst -------------------------------------------------------------------

template <typename Fn>
std::optional<double> tipping_or_none(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::no_tipping_point) {
            throw;
        }
        return std::nullopt;
    }
}

void cmd_worst(const Options& opt) {
    const ScenarioFile cfg = load_config(opt);
    if (!cfg.worst_case) {
        fail(ErrorCode::config_invalid, "config: missing 'worst_case' section");
    }
    const WorstCaseScenario& scn = cfg.worst_case->scenario;
    std::optional<NoiseSpec> noise;
    if (cfg.noise) {
        if (cfg.noise->kinds.size() != 1 || cfg.noise->theta.size() != 1) {
            fail(ErrorCode::config_invalid, "config: 'noise' for worst takes a single kind and a single theta");
        }
        noise = NoiseSpec{cfg.noise->kinds.front(), cfg.noise->theta.front()};
    }

    const auto alpha_star = tipping_or_none([&] { return tipping_point(scn); });
    std::optional<double> alpha_star_social;
    std::optional<double> alpha_star_noisy;
    if (cfg.social) {
        alpha_star_social = tipping_or_none([&] { return social_tipping_point(scn, *cfg.social); });
    }
    if (noise) {
        alpha_star_noisy = tipping_or_none([&] { return noisy_tipping_point(scn, *noise); });
    }

    const auto& alphas = cfg.worst_case->alpha;
    std::vector<double> w(alphas.size());
    std::vector<double> w_social(alphas.size());
    std::vector<double> w_noisy(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) {
        w[i] = worst_case_prob(scn, alphas[i]);
        if (cfg.social) {
            w_social[i] = social_worst_case_prob(scn, *cfg.social, alphas[i]);
        }
        if (noise) {
            w_noisy[i] = noisy_worst_case_prob(scn, *noise, alphas[i]);
        }
    });

    if (opt.format == "json") {
        json doc;
        doc["alpha_star"] = nullable(alpha_star);
        if (cfg.social) {
            doc["alpha_star_social"] = nullable(alpha_star_social);
        }
        if (noise) {
            doc["alpha_star_noisy"] = nullable(alpha_star_noisy);
            doc["noise"] = {{"kind", to_string(noise->kind)}, {"theta", noise->theta}};
        }
        json rows = json::array();
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            json row = {{"alpha", alphas[i]}, {"W", w[i]}};
            if (cfg.social) {
                row["W_social"] = w_social[i];
            }
            if (noise) {
                row["W_noisy"] = w_noisy[i];
            }
            rows.push_back(row);
        }
        doc["rows"] = rows;
        emit(opt.out, dump(doc));
        return;
    }

    CsvRow header{"alpha", "W"};
    if (cfg.social) {
        header.push_back("W_social");
    }
    if (noise) {
        header.push_back("W_noisy");
    }
    header.push_back("alpha_star");
    if (cfg.social) {
        header.push_back("alpha_star_social");
    }
    if (noise) {
        header.push_back("alpha_star_noisy");
    }
    std::string text = csv_line(header);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        CsvRow row{format_float(alphas[i]), format_float(w[i])};
        if (cfg.social) {
            row.push_back(format_float(w_social[i]));
        }
        if (noise) {
            row.push_back(format_float(w_noisy[i]));
        }
        row.push_back(csv_optional(alpha_star));
        if (cfg.social) {
            row.push_back(csv_optional(alpha_star_social));
        }
        if (noise) {
            row.push_back(csv_optional(alpha_star_noisy));
        }
        text += csv_line(row);
    }
    emit(opt.out, text);
}

// --- gradmap -----------------------------------------------------------------

void cmd_gradmap(const Options& opt) {
    const ScenarioFile cfg = load_config(opt);
    const GradmapSection grid = cfg.gradmap.value_or(GradmapSection{});
    std::vector<NoiseKind> kinds{NoiseKind::gaussian, NoiseKind::rademacher};
    std::vector<double> theta = default_gradmap_theta();
    if (cfg.noise) {
        kinds = cfg.noise->kinds;
        theta = cfg.noise->theta;
    }

    GradientMapOptions options;
    options.beta = grid.beta;
    std::vector<GradientSignRow> rows;
    std::vector<GradientCell> cells;
    for (NoiseKind kind : kinds) {
        const auto part = gradient_sign_map(grid.n, grid.u_abs, kind, grid.alpha, theta, options,
                                            opt.cells.empty() ? nullptr : &cells);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    if (opt.format == "json") {
        json doc = json::array();
        for (const auto& r : rows) {
            doc.push_back({{"n", r.n},
                           {"u_abs", r.u_abs},
                           {"noise_kind", to_string(r.kind)},
                           {"fraction_negative", r.fraction_negative}});
        }
        emit(opt.out, dump(doc));
    } else {
        emit(opt.out, gradient_map_to_csv(rows));
    }
    if (!opt.cells.empty()) {
        write_file_atomic(opt.cells, gradient_cells_to_csv(cells));
    }
}

// --- classify ----------------------------------------------------------------

void cmd_classify(const Options& opt) {
    const RuleSet rules = as_usage([&] { return RuleSet::from_file(opt.rules); });
    std::vector<double> g_grid;
    if (opt.calibrate) {
        g_grid = as_usage([&] { return parse_range(opt.g_grid); });
        if (opt.steady_out.empty()) {
            fail(ErrorCode::config_invalid, "--calibrate needs --steady-out");
        }
    }

    const auto records = read_log_csv(read_text_file(opt.input));
    const Classifier classifier(rules);
    const ClassifiedCorpus corpus = classify_corpus(classifier, records);
    if (!opt.out.empty()) {
        write_file_atomic(opt.out, labeled_csv(corpus.labeled));
    }

    json summary = {{"counts", counts_json(corpus.counts)}, {"params", nullptr}};
    std::optional<Error> estimate_error;
    try {
        const EstimatedParams params = estimate_params(corpus.counts);
        summary["params"] = {{"p_accept", params.p_accept}, {"p_success", params.p_success}};
    } catch (const Error& e) {
        estimate_error = e;
    }
    emit(opt.summary, dump(summary));
    if (estimate_error) {
        throw *estimate_error;
    }

    if (opt.calibrate) {
        write_file_atomic(opt.steady_out, sweep_to_csv(calibrated_steady_state(corpus.counts, g_grid)));
    }
}

// --- simulate ----------------------------------------------------------------

json compare_rate(const SelectionSummary& summary, double expected) {
    const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(summary.rounds));
    const double err = std::abs(summary.all_reject_rate - expected);
    return {{"expected_all_reject_rate", expected},
            {"standard_error", se},
            {"abs_error", err},
            {"within_3se", err <= 3.0 * se}};
}

void cmd_simulate(const Options& opt) {
    if (opt.sim_format != "json") {
        fail(ErrorCode::config_invalid, "simulate writes JSON only");
    }
    const ScenarioFile cfg = load_config(opt);
    if (!cfg.sim) {
        fail(ErrorCode::config_invalid, "config: missing 'sim' section");
    }
    SimSection sim = *cfg.sim;
    if (opt.seed) {
        sim.seed = *opt.seed;
    }

    json doc = json::object();
    bool ran = false;

    if (cfg.chain) {
        const ChainSection& c = *cfg.chain;
        if (c.p_good.size() != 1 || c.p_accept.size() != 1 || c.p_success.size() != 1) {
            fail(ErrorCode::config_invalid, "config: 'chain' grids must be single values for simulate");
        }
        const ChainParams params(c.p_good[0], c.p_accept[0], c.p_success[0]);
        const SimConfig sc{sim.seed, sim.steps, sim.burn_in};
        const Occupancy occ = simulate_chain(params, sc);
        json chain = chain_summary_json(sc, occ);
        if (opt.compare) {
            const SteadyState pi = steady_state(params);
            double max_err = 0.0;
            for (int i = 0; i < kNumStates; ++i) {
                max_err = std::max(max_err, std::abs(occ[i] - pi[i]));
            }
            chain["analytic"] = pi.pi;
            chain["max_abs_error"] = max_err;
            chain["tolerance"] = 0.01;
            chain["pass"] = max_err <= 0.01;
        }
        doc["chain"] = chain;
        ran = true;
    }

    if (sim.alpha) {
        if (!cfg.worst_case) {
            fail(ErrorCode::config_invalid, "config: 'sim.alpha' needs a 'worst_case' section");
        }
        const WorstCaseScenario& scn = cfg.worst_case->scenario;
        const SelectionSummary summary = run_mixture_rounds(scn, *sim.alpha, sim.rounds, sim.seed);
        json mix = selection_summary_json(summary);
        mix["alpha"] = *sim.alpha;
        mix["n"] = scn.n;
        if (opt.compare) {
            mix["analytic"] = compare_rate(summary, worst_case_prob(scn, *sim.alpha));
        }
        doc["mixture"] = mix;
        ran = true;
    }

    if (!sim.candidates.empty()) {
        const ControllerContext ctx{sim.delta_d_ideal};
        const SelectionSummary summary = run_selection_rounds(sim.candidates, ctx, sim.rounds, sim.seed);
        json sel = selection_summary_json(summary);
        if (opt.compare) {
            double all_reject = 1.0;
            for (const auto& c : sim.candidates) {
                all_reject *= p_reject(c.profile);
            }
            sel["analytic"] = compare_rate(summary, all_reject);
        }
        doc["selection"] = sel;
        ran = true;
    }

    if (!ran) {
        fail(ErrorCode::config_invalid,
             "config: nothing to simulate (needs 'chain', 'sim.alpha' with 'worst_case', or 'sim.candidates')");
    }
    emit(opt.out, dump(doc));
}

// --- rank --------------------------------------------------------------------

void cmd_rank(const Options& opt) {
    const auto candidates = as_usage([&] {
        json doc;
        try {
            doc = json::parse(read_text_file(opt.candidates));
        } catch (const json::parse_error& e) {
            fail(ErrorCode::parse_error, "candidates file is not valid JSON: " + std::string(e.what()));
        }
        return candidates_from_json(doc);
    });
    const ControllerContext ctx{opt.delta_d};
    as_usage([&] { ctx.validate(); });
    const auto order = rank_candidates(candidates, ctx);

    auto find = [&](const std::string& id) -> const ControllerCandidate& {
        return *std::find_if(candidates.begin(), candidates.end(),
                             [&](const ControllerCandidate& c) { return c.profile.id == id; });
    };
    if (opt.format == "json") {
        json doc = json::array();
        for (std::size_t i = 0; i < order.size(); ++i) {
            const auto& c = find(order[i]);
            doc.push_back({{"rank", i + 1},
                           {"id", c.profile.id},
                           {"p_accept", p_accept(c.profile)},
                           {"payoff", controller_payoff(c, ctx)}});
        }
        emit(opt.out, dump(doc));
        return;
    }
    std::string text = csv_line({"rank", "id", "p_accept", "payoff"});
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& c = find(order[i]);
        text += csv_line({std::to_string(i + 1), c.profile.id, format_float(p_accept(c.profile)),
                          format_float(controller_payoff(c, ctx))});
    }
    emit(opt.out, text);
}

// --- synth -------------------------------------------------------------------

void cmd_synth(const Options& opt) {
    const RuleSet rules = as_usage([&] { return RuleSet::from_file(opt.rules); });
    const auto corpus = synthesize_corpus(rules, opt.count, opt.seed.value_or(0));
    std::string text = csv_line({"timestamp", "facility", "comment", "expected_label"});
    for (const auto& s : corpus) {
        text += csv_line({format_timestamp(s.record.timestamp), s.record.facility, s.record.comment,
                          to_string(s.label)});
    }
    emit(opt.out, text);
}

void add_common(CLI::App* sub, Options& opt, bool with_format) {
    sub->add_option("--out", opt.out, "Output path (stdout when omitted)");
    if (with_format) {
        sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathfinder selection and gate-reopening analysis"};
    app.require_subcommand(1);
    Options opt;
    std::function<void(const Options&)> command;

    auto* steady = app.add_subcommand("steady", "Steady-state sweep over the chain grids");
    steady->add_option("--config", opt.config, "Scenario JSON")->required();
    add_common(steady, opt, true);
    steady->callback([&] { command = cmd_steady; });

    auto* worst = app.add_subcommand("worst", "Worst-case probability W(alpha) and tipping points");
    worst->add_option("--config", opt.config, "Scenario JSON")->required();
    add_common(worst, opt, true);
    worst->callback([&] { command = cmd_worst; });

    auto* gradmap = app.add_subcommand("gradmap", "Fraction of negative dW/dtheta cells per (n, |U|)");
    gradmap->add_option("--config", opt.config, "Scenario JSON")->required();
    gradmap->add_option("--cells", opt.cells, "Also write every evaluated cell to this CSV");
    add_common(gradmap, opt, true);
    gradmap->callback([&] { command = cmd_gradmap; });

    auto* classify = app.add_subcommand("classify", "Label coordination-log comments and estimate chain parameters");
    classify->add_option("input", opt.input, "Log CSV (timestamp,facility,comment)")->required();
    classify->add_option("--rules", opt.rules, "Rules JSON")->required();
    classify->add_option("--out", opt.out, "Labeled CSV output");
    classify->add_option("--summary", opt.summary, "Counts and parameter JSON (stdout when omitted)");
    classify->add_flag("--calibrate", opt.calibrate, "Sweep the steady state at the estimated parameters");
    classify->add_option("--g-grid", opt.g_grid, "p_good grid lo:hi:step for --calibrate");
    classify->add_option("--steady-out", opt.steady_out, "Steady-state CSV for --calibrate");
    classify->callback([&] { command = cmd_classify; });

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo chain trajectories and selection rounds");
    simulate->add_option("--config", opt.config, "Scenario JSON")->required();
    simulate->add_option("--seed", opt.seed, "Overrides sim.seed");
    simulate->add_flag("--compare", opt.compare, "Compare against the analytic values");
    simulate->add_option("--format", opt.sim_format, "Output format (json only)");
    simulate->add_option("--out", opt.out, "Output path (stdout when omitted)");
    simulate->callback([&] { command = cmd_simulate; });

    auto* rank = app.add_subcommand("rank", "Rank controller candidates by expected payoff");
    rank->add_option("--candidates", opt.candidates, "Candidates JSON")->required();
    rank->add_option("--delta-d", opt.delta_d, "Ideal delay reduction");
    add_common(rank, opt, true);
    rank->callback([&] { command = cmd_rank; });

    auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic log corpus");
    synth->add_option("--rules", opt.rules, "Rules JSON")->required();
    synth->add_option("--count", opt.count, "Number of records");
    synth->add_option("--seed", opt.seed, "Generator seed");
    synth->add_option("--out", opt.out, "Output path (stdout when omitted)");
    synth->callback([&] { command = cmd_synth; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    try {
        command(opt);
    } catch (const Error& e) {
        std::cerr << "pathfinder-error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return e.code() == ErrorCode::config_invalid ? kExitUsage : kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "pathfinder-error: internal: " << e.what() << '\n';
        return kExitCompute;
    }
    return 0;
}
