#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "pathfinder/io.hpp"

namespace fs = std::filesystem;
using pathfinder::parse_csv;
using pathfinder::read_text_file;

namespace {

const std::string kBin = PATHFINDER_BIN;
const std::string kData = PATHFINDER_DATA_DIR;
const std::string kConfigs = PATHFINDER_CONFIG_DIR;

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("pathfinder_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        pathfinder::write_file_atomic(dir / name, text);
        return path(name);
    }
};

const Scratch& scratch() {
    static Scratch s;
    return s;
}

struct Run {
    int status;
    std::string err;
};

Run run(const std::string& args) {
    const std::string err_path = scratch().path("stderr.txt");
    const std::string cmd = "'" + kBin + "' " + args + " 2> '" + err_path + "'";
    const int raw = std::system(cmd.c_str());
    Run r{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ""};
    if (fs::exists(err_path)) {
        r.err = read_text_file(err_path);
    }
    return r;
}

std::vector<std::vector<std::string>> csv_file(const std::string& path) { return parse_csv(read_text_file(path)); }

}  // namespace

TEST_CASE("steady") {
    const auto cfg = scratch().write("steady1.json", R"({"chain": {"p_good": 0.5, "p_accept": 1, "p_success": 1}})");
    const auto out = scratch().path("steady1.csv");
    REQUIRE(run("steady --config " + cfg + " --out " + out).status == 0);
    CHECK(read_text_file(out) ==
          "p_good,p_accept,p_success,pi0,pi1,pi2,pi3,status\n"
          "0.5,1,1,0.333333333333,0.166666666667,0.166666666667,0.333333333333,ok\n");

    const auto cal = scratch().path("steady_cal.csv");
    REQUIRE(run("steady --config " + kConfigs + "/steady_calibrated.json --out " + cal).status == 0);
    const auto rows = csv_file(cal);
    REQUIRE(rows.size() == 10);
    CHECK(std::stod(rows[1][3]) == doctest::Approx(0.75).epsilon(0.02));
    CHECK(std::stod(rows[9][3]) == doctest::Approx(0.09).epsilon(0.05));

    const auto json_out = scratch().path("steady1.json.out");
    REQUIRE(run("steady --config " + cfg + " --format json --out " + json_out).status == 0);
    const auto doc = nlohmann::json::parse(read_text_file(json_out));
    CHECK(doc[0]["status"] == "ok");
}

TEST_CASE("steady errors") {
    const auto empty = scratch().write("empty.json", "{}");
    const auto r = run("steady --config " + empty);
    CHECK(r.status == 2);
    CHECK(r.err.rfind("pathfinder-error: config_invalid:", 0) == 0);
    CHECK(r.err.find("chain") != std::string::npos);

    const auto typo = scratch().write("typo.json", R"({"chain": {"p_godo": 0.5}})");
    CHECK(run("steady --config " + typo).status == 2);
    CHECK(run("steady --config /nonexistent.json").status == 2);
    CHECK(run("steady").status == 2);
    CHECK(run("frobnicate").status == 2);

    const auto degenerate = scratch().write("degenerate.json", R"({"chain": {"p_good": [0, 1], "p_accept": 0, "p_success": 0.5}})");
    const auto out = scratch().path("never.csv");
    const auto d = run("steady --config " + degenerate + " --out " + out);
    CHECK(d.status == 3);
    CHECK(d.err.find("non_unique_stationary") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("worst") {
    const auto out = scratch().path("worst.csv");
    REQUIRE(run("worst --config " + kConfigs + "/worst_case.json --out " + out).status == 0);
    const auto rows = csv_file(out);
    CHECK(rows[0] == std::vector<std::string>{"alpha", "W", "alpha_star"});
    CHECK(rows.size() == 102);
    CHECK(std::stod(rows[1][2]) == doctest::Approx(0.8864).epsilon(0.0005));

    const auto selfish = scratch().write("selfish.json", R"({"worst_case": {}, "social": {"s": 1, "gamma": 2.5, "r": 0.5}})");
    const auto s_out = scratch().path("selfish.csv");
    REQUIRE(run("worst --config " + selfish + " --out " + s_out).status == 0);
    const auto s_rows = csv_file(s_out);
    CHECK(s_rows[0][2] == "W_social");
    for (std::size_t i = 1; i < s_rows.size(); ++i) {
        CHECK(s_rows[i][1] == s_rows[i][2]);
    }

    for (const char* kind : {"gaussian", "rademacher"}) {
        const auto quiet = scratch().write(std::string("quiet_") + kind + ".json",
                                           std::string(R"({"worst_case": {}, "noise": {"kind": ")") + kind +
                                               R"(", "theta": 0}})");
        const auto q_out = scratch().path("quiet.csv");
        REQUIRE(run("worst --config " + quiet + " --out " + q_out).status == 0);
        const auto q_rows = csv_file(q_out);
        CHECK(q_rows[0][2] == "W_noisy");
        for (std::size_t i = 1; i < q_rows.size(); ++i) {
            CHECK(std::abs(std::stod(q_rows[i][1]) - std::stod(q_rows[i][2])) <= 1e-12);
        }
    }

    const auto two = scratch().write("two_noise.json", R"({"worst_case": {}, "noise": {"kind": "gaussian", "theta": [1, 2]}})");
    CHECK(run("worst --config " + two).status == 2);
}

TEST_CASE("gradmap") {
    const auto g_out = scratch().path("grad_g.csv");
    const auto r_out = scratch().path("grad_r.csv");
    REQUIRE(run("gradmap --config " + kConfigs + "/gradmap_gaussian.json --out " + g_out).status == 0);
    REQUIRE(run("gradmap --config " + kConfigs + "/gradmap_rademacher.json --out " + r_out).status == 0);
    const auto g = csv_file(g_out);
    const auto r = csv_file(r_out);
    CHECK(g[0] == r[0]);
    CHECK(g[0] == std::vector<std::string>{"n", "u_abs", "noise_kind", "fraction_negative"});
    CHECK(g.size() == 17);
    CHECK(r.size() == 17);
    for (const auto* table : {&g, &r}) {
        for (std::size_t i = 1; i < table->size(); ++i) {
            const double f = std::stod((*table)[i][3]);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            if ((*table)[i][0] == "10" && (*table)[i][1] == "2") {
                CHECK(f < 0.2);
            }
        }
    }
}

TEST_CASE("classify") {
    const auto labeled = scratch().path("labeled.csv");
    const auto summary = scratch().path("summary.json");
    REQUIRE(run("classify " + kData + "/ntml_fixture.csv --rules " + kData + "/rules.json --out " + labeled +
                " --summary " + summary)
                .status == 0);
    const auto expected = csv_file(kData + "/ntml_fixture.csv");
    const auto got = csv_file(labeled);
    REQUIRE(got.size() == expected.size());
    CHECK(got[0] == std::vector<std::string>{"timestamp", "facility", "comment", "label", "rule"});
    for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i][3] == expected[i][3]);
    }
    const auto doc = nlohmann::json::parse(read_text_file(summary));
    CHECK(doc["counts"]["total"] == 50);

    const auto cal_summary = scratch().path("cal_summary.json");
    const auto steady = scratch().path("cal_steady.csv");
    REQUIRE(run("classify " + kData + "/ntml_calibration.csv --rules " + kData + "/rules.json --summary " +
                cal_summary + " --calibrate --g-grid 0.1:0.9:0.1 --steady-out " + steady)
                .status == 0);
    const auto cal = nlohmann::json::parse(read_text_file(cal_summary));
    CHECK(cal["params"]["p_accept"].get<double>() == 100.0 / 123.0);
    CHECK(cal["params"]["p_success"].get<double>() == 0.87);
    const auto rows = csv_file(steady);
    REQUIRE(rows.size() == 10);
    CHECK(std::stod(rows[1][3]) == doctest::Approx(0.75).epsilon(0.02));
    CHECK(std::stod(rows[1][6]) == doctest::Approx(0.07).epsilon(0.1));
    CHECK(std::stod(rows[9][3]) == doctest::Approx(0.09).epsilon(0.06));
    CHECK(std::stod(rows[9][6]) == doctest::Approx(0.72).epsilon(0.01));
}

TEST_CASE("classify errors") {
    const auto mentions = scratch().write("mentions.csv",
                                          "timestamp,facility,comment\n"
                                          "2023-01-01T00:00:00Z,ZNY,pathfinder ops later\n"
                                          "2023-01-01T01:00:00Z,ZNY,UAL1 assigned\n");
    const auto r = run("classify " + mentions + " --rules " + kData + "/rules.json --summary " +
                       scratch().path("m.json"));
    CHECK(r.status == 3);
    CHECK(r.err.find("insufficient_data") != std::string::npos);

    const auto bad_rules = scratch().write("bad_rules.json", R"({"Faild": ["x"]})");
    const auto b = run("classify " + mentions + " --rules " + bad_rules);
    CHECK(b.status == 2);
    CHECK(b.err.find("Faild") != std::string::npos);

    const auto bad_csv = scratch().write("bad.csv", "timestamp,facility,comment\nnot-a-time,ZNY,x\n");
    CHECK(run("classify " + bad_csv + " --rules " + kData + "/rules.json").status == 3);
    CHECK(run("classify " + kData + "/ntml_fixture.csv --rules " + kData + "/rules.json --calibrate").status == 2);
}

TEST_CASE("simulate") {
    const auto a = scratch().path("sim_a.json");
    const auto b = scratch().path("sim_b.json");
    REQUIRE(run("simulate --config " + kConfigs + "/simulate.json --compare --out " + a).status == 0);
    REQUIRE(run("simulate --config " + kConfigs + "/simulate.json --compare --out " + b).status == 0);
    CHECK(read_text_file(a) == read_text_file(b));
    const auto doc = nlohmann::json::parse(read_text_file(a));
    CHECK(doc["chain"]["pass"] == true);
    CHECK(doc["chain"]["max_abs_error"].get<double>() <= 0.01);
    CHECK(doc["mixture"]["analytic"]["within_3se"] == true);
    CHECK(doc["mixture"]["rounds"] == 100000);

    const auto c = scratch().path("sim_c.json");
    REQUIRE(run("simulate --config " + kConfigs + "/simulate.json --seed 5 --out " + c).status == 0);
    CHECK(nlohmann::json::parse(read_text_file(c))["chain"]["seed"] == 5);

    const auto nothing = scratch().write("nothing.json", R"({"sim": {}})");
    CHECK(run("simulate --config " + nothing).status == 2);
    CHECK(run("simulate --config " + kConfigs + "/simulate.json --format csv").status == 2);
}

TEST_CASE("rank and synth") {
    const auto cands = scratch().write("cands.json", R"([
        {"profile": {"id": "B", "reward": 0, "participation_cost": 0, "failure_cost": 0, "beta": 1, "p_success_i": 1}, "epsilon": 0.5},
        {"profile": {"id": "A", "reward": 0, "participation_cost": 0, "failure_cost": 0, "beta": 1, "p_success_i": 1}, "epsilon": 0.5},
        {"profile": {"id": "C", "reward": 3, "participation_cost": 0, "failure_cost": 0, "beta": 1, "p_success_i": 1}, "epsilon": 0.5}
    ])");
    const auto out = scratch().path("rank.csv");
    REQUIRE(run("rank --candidates " + cands + " --delta-d 100 --out " + out).status == 0);
    const auto rows = csv_file(out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1][1] == "C");
    CHECK(rows[2][1] == "A");
    CHECK(rows[3][1] == "B");
    CHECK(rows[2][3] == "25");

    const auto dup = scratch().write("dup.json", R"([
        {"profile": {"id": "A", "reward": 0, "participation_cost": 0, "failure_cost": 0, "beta": 1, "p_success_i": 1}, "epsilon": 0.5},
        {"profile": {"id": "A", "reward": 0, "participation_cost": 0, "failure_cost": 0, "beta": 1, "p_success_i": 1}, "epsilon": 0.5}
    ])");
    CHECK(run("rank --candidates " + dup).status == 3);

    const auto s1 = scratch().path("synth1.csv");
    const auto s2 = scratch().path("synth2.csv");
    REQUIRE(run("synth --rules " + kData + "/rules.json --count 40 --seed 8 --out " + s1).status == 0);
    REQUIRE(run("synth --rules " + kData + "/rules.json --count 40 --seed 8 --out " + s2).status == 0);
    CHECK(read_text_file(s1) == read_text_file(s2));
    CHECK(csv_file(s1).size() == 41);
}
