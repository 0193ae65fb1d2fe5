// Copyright 2026 The cvsqueeze Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end tests driving the installed binary through a shell, checking
// exit codes, file outputs, and determinism guarantees.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cvsqueeze/gauss_ops.hpp"
#include "cvsqueeze/gaussian_state.hpp"

using namespace cvsqueeze;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

const fs::path &scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::current_path() / "cli_scratch";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path &path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string &args) {
    const fs::path out_file = scratch() / "stdout.txt";
    const fs::path err_file = scratch() / "stderr.txt";
    const std::string cmd = "cd '" + scratch().string() + "' && '" + CVSQUEEZE_CLI_PATH + "' " +
                            args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

json load_json(const std::string &name) {
    return json::parse(slurp(scratch() / name));
}

json stripped_report(const std::string &name) {
    json j = load_json(name);
    j.erase("meta");
    return j;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("--bogus").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("concentrate --copies notanumber").exit_code == 1);
    CHECK(run_cli("concentrate --single --epr").exit_code == 1);
}

TEST_CASE("prepare writes validated reloadable state files") {
    REQUIRE(run_cli("prepare --single --r 0.5 --x0 3 --out single.json").exit_code == 0);
    const GaussianState s = read_state_file((scratch() / "single.json").string());
    CHECK(s.n_modes() == 1);
    CHECK(std::abs(s.var_of(0, Quadrature::X) - 0.18393972058572117) < 1e-15);
    CHECK(s.mean_of(0, Quadrature::X) == 3.0);

    REQUIRE(run_cli("prepare --epr --r1 0.5 --r2 0.5 --x0 1 --out epr.json").exit_code == 0);
    const GaussianState e = read_state_file((scratch() / "epr.json").string());
    CHECK(e.n_modes() == 2);
    Eigen::VectorXd w(4);
    w << 1, 0, 1, 0;
    CHECK(std::abs(quad_variance(e, w) - 2.718281828459045) < 1e-14);
    CHECK(e.mean_of(0, Quadrature::X) == 1.0);

    // Rerunning the same preparation reproduces the file byte for byte.
    REQUIRE(run_cli("prepare --epr --r1 0.5 --r2 0.5 --x0 1 --out epr2.json").exit_code == 0);
    CHECK(slurp(scratch() / "epr.json") == slurp(scratch() / "epr2.json"));

    CHECK(run_cli("prepare --single --r 0").exit_code == 1);
}

TEST_CASE("concentrate reports the halving rule") {
    REQUIRE(run_cli("concentrate --single --r 0 --x0 1.7 --seed 11 --out c.json").exit_code == 0);
    const json rep = load_json("c.json")["report"];
    CHECK(rep["copies_used"] == 2);
    const double var_in = rep["input"]["var_x"][0].get<double>();
    const double var_out = rep["output"]["var_x"][0].get<double>();
    CHECK(std::abs(var_out / var_in - 0.5) < 1e-12);
    CHECK(std::abs(rep["output"]["mean_x"][0].get<double>() - 1.7) < 1e-12);
    CHECK(rep["mean_preservation_error"].get<double>() < 1e-12);
    CHECK(rep["trace"].size() == 1);
    CHECK(rep["seed_info"] == "concentrate#11");
}

TEST_CASE("concentrate handles n copies and rejects bad pairings") {
    REQUIRE(run_cli("concentrate --single --r 0 --x0 1.7 --copies 8 "
                    "--pairing binary_tree --seed 3 --out c8.json")
                .exit_code == 0);
    const json rep = load_json("c8.json")["report"];
    const double ratio = rep["output"]["var_x"][0].get<double>() /
                         rep["input"]["var_x"][0].get<double>();
    CHECK(std::abs(ratio - 0.125) < 1e-12);
    CHECK(rep["gains"].size() == 7);

    CHECK(run_cli("concentrate --single --r 0 --copies 3 --pairing binary_tree "
                  "--out bad.json")
              .exit_code == 1);
    CHECK(run_cli("concentrate --single --r 0 --copies 3 --pairing sequential "
                  "--out c3.json")
              .exit_code == 0);
    CHECK(load_json("c3.json")["report"]["gains"].size() == 2);
}

TEST_CASE("seeded runs reproduce their reports exactly") {
    const std::string args =
        "concentrate --epr --r1 0.5 --r2 0.5 --x0 random:-5,5 --seed 7 --out seeded.json";
    REQUIRE(run_cli(args).exit_code == 0);
    const json first = stripped_report("seeded.json");
    const json first_full = load_json("seeded.json");
    REQUIRE(run_cli(args).exit_code == 0);
    CHECK(first == stripped_report("seeded.json"));
    CHECK(first_full.contains("meta"));
    CHECK(first_full["meta"].contains("timestamp"));
    CHECK_FALSE(first.contains("meta"));

    REQUIRE(run_cli("concentrate --epr --r1 0.5 --r2 0.5 --x0 random:-5,5 --seed 8 "
                    "--out seeded.json")
                .exit_code == 0);
    CHECK(first != stripped_report("seeded.json"));
}

TEST_CASE("environment variable supplies the default seed") {
    setenv("CVSQUEEZE_SEED", "7", 1);
    const int code = run_cli("concentrate --single --r 0.3 --x0 random:-2,2 "
                             "--out env_seed.json")
                         .exit_code;
    unsetenv("CVSQUEEZE_SEED");
    REQUIRE(code == 0);
    REQUIRE(run_cli("concentrate --single --r 0.3 --x0 random:-2,2 --seed 7 "
                    "--out flag_seed.json")
                .exit_code == 0);
    json env_rep = stripped_report("env_seed.json");
    json flag_rep = stripped_report("flag_seed.json");
    env_rep["config"].erase("out");
    flag_rep["config"].erase("out");
    CHECK(env_rep == flag_rep);
}

TEST_CASE("config file values sit between defaults and flags") {
    {
        std::ofstream f(scratch() / "cfg.json");
        f << R"({"schema_version": 1, "subcommand": "concentrate", "r": 0.5, "copies": 4,)"
          << R"( "seed": 9, "out": "from_cfg.json"})";
    }
    REQUIRE(run_cli("concentrate --config cfg.json --copies 2 --dump-config eff.json")
                .exit_code == 0);
    const json eff = load_json("eff.json");
    CHECK(eff["copies"] == 2);        // flag wins
    CHECK(eff["r"] == 0.5);           // file wins over default 0
    CHECK(eff["seed"] == 9);          // file wins over default
    CHECK(eff["out"] == "from_cfg.json");
    CHECK(eff["schema_version"] == 1);

    // A dumped config reloads into the identical effective config.
    REQUIRE(run_cli("concentrate --config eff.json --dump-config eff2.json").exit_code == 0);
    CHECK(slurp(scratch() / "eff.json") == slurp(scratch() / "eff2.json"));

    CHECK(run_cli("concentrate --config does_not_exist.json --out x.json").exit_code == 1);
    {
        std::ofstream f(scratch() / "wrong_sub.json");
        f << R"({"schema_version": 1, "subcommand": "sweep"})";
    }
    CHECK(run_cli("concentrate --config wrong_sub.json --out x.json").exit_code == 1);
    {
        std::ofstream f(scratch() / "wrong_ver.json");
        f << R"({"schema_version": 99, "subcommand": "concentrate"})";
    }
    CHECK(run_cli("concentrate --config wrong_ver.json --out x.json").exit_code == 1);
}

TEST_CASE("state files flow back in through the input flag") {
    REQUIRE(run_cli("prepare --epr --r1 0.5 --r2 0.5 --x0 1 --out in.json").exit_code == 0);
    REQUIRE(run_cli("concentrate --input in.json --seed 4 --out from_file.json "
                    "--state-out out_state.json")
                .exit_code == 0);
    REQUIRE(run_cli("concentrate --epr --r1 0.5 --r2 0.5 --x0 1 --seed 4 --out inline.json")
                .exit_code == 0);
    CHECK(load_json("from_file.json")["report"]["output"] ==
          load_json("inline.json")["report"]["output"]);

    const GaussianState out_state = read_state_file((scratch() / "out_state.json").string());
    CHECK(out_state.n_modes() == 2);
    CHECK(out_state.is_physical());
    CHECK(run_cli("concentrate --input missing.json --out x.json").exit_code != 0);
}

TEST_CASE("corrupt state files map to the right exit codes") {
    {
        std::ofstream f(scratch() / "asym.json");
        f << R"({"n_modes": 1, "ordering": "xpxp", "hbar": 1, "vacuum_variance": 0.5,)"
          << R"( "mean": [0, 0], "cov": [[0.5, 0.2], [-0.2, 0.5]], "schema_version": 1})";
    }
    CHECK(run_cli("concentrate --input asym.json --out x.json").exit_code == 1);
    {
        std::ofstream f(scratch() / "tight.json");
        f << R"({"n_modes": 1, "ordering": "xpxp", "hbar": 1, "vacuum_variance": 0.5,)"
          << R"( "mean": [0, 0], "cov": [[0.1, 0], [0, 0.1]], "schema_version": 1})";
    }
    CHECK(run_cli("concentrate --input tight.json --out x.json").exit_code == 2);
    {
        std::ofstream f(scratch() / "garbage.json");
        f << "{not json";
    }
    CHECK(run_cli("concentrate --input garbage.json --out x.json").exit_code == 1);
}

TEST_CASE("sweep emits one csv row per grid point") {
    REQUIRE(run_cli("sweep --out sweep.csv --seed 5").exit_code == 0);
    const std::string csv = slurp(scratch() / "sweep.csv");
    std::istringstream lines(csv);
    std::string line;
    int rows = 0;
    std::string header;
    std::string mid_row;
    while (std::getline(lines, line)) {
        if (rows == 0) header = line;
        if (line.rfind("0.5,", 0) == 0) mid_row = line;
        ++rows;
    }
    CHECK(rows == 12);  // header + 11 grid points
    CHECK(header == "r,sigma_plus,sigma_minus,purity_P,logneg,mean_err");
    // Post-protocol values at r = 0.5: half of e, half of 1/e, 1/cosh(1),
    // and one bit per log2(e).
    CHECK(mid_row.find("1.35914091423") != std::string::npos);
    CHECK(mid_row.find("0.183939720586") != std::string::npos);
    CHECK(mid_row.find("0.648054273664") != std::string::npos);
    CHECK(mid_row.find("1.44269504089") != std::string::npos);

    REQUIRE(run_cli("sweep --out sweep2.csv --seed 5").exit_code == 0);
    CHECK(csv == slurp(scratch() / "sweep2.csv"));

    REQUIRE(run_cli("sweep --r-from 0.2 --r-to 0.4 --r-step 0.1 --out short.csv").exit_code ==
            0);
    std::istringstream short_lines(slurp(scratch() / "short.csv"));
    int short_rows = 0;
    while (std::getline(short_lines, line)) ++short_rows;
    CHECK(short_rows == 4);

    CHECK(run_cli("sweep --r-from 1 --r-to 0 --out bad.csv").exit_code == 1);
    CHECK(run_cli("sweep").exit_code == 1);
}

TEST_CASE("montecarlo validates its sampled statistics") {
    REQUIRE(run_cli("montecarlo --r 0 --trials 100000 --seed 2026 --out mc.json").exit_code ==
            0);
    const json rep = load_json("mc.json")["report"];
    CHECK(rep["checks"]["mean_within_3se"] == true);
    CHECK(rep["checks"]["variance_within_1pct"] == true);
    CHECK(rep["checks"]["outcomes_independent_of_x0"] == true);
    CHECK(rep["stats"]["expected_variance"] == 0.25);
    CHECK(rep["ks"]["pass"] == true);
    CHECK(rep["ks"]["statistic"].get<double>() <
          rep["ks"]["threshold"].get<double>());

    CHECK(run_cli("montecarlo --trials 50 --out mc_small.json").exit_code == 1);
}

TEST_CASE("oracle check passes on default grids for every scenario") {
    REQUIRE(run_cli("oracle-check --scenario single --out oc_single.json").exit_code == 0);
    REQUIRE(run_cli("oracle-check --scenario two_mode --out oc_two.json").exit_code == 0);
    REQUIRE(run_cli("oracle-check --scenario single_wigner --out oc_wig.json").exit_code == 0);

    for (const std::string name : {"oc_single.json", "oc_two.json", "oc_wig.json"}) {
        const json rep = load_json(name)["report"];
        CHECK(rep["pass"] == true);
        CHECK(rep["worst"].get<double>() < 1e-3);
        CHECK(rep.contains("engine"));
        CHECK(rep.contains("oracle"));
    }

    const json two = load_json("oc_two.json")["report"];
    CHECK(two["engine"]["x"].contains("var"));
    CHECK(two["oracle"]["x"].contains("var"));
}

TEST_CASE("oracle check rejects uncertifiable grids with a diagnostic") {
    const RunResult coarse =
        run_cli("oracle-check --scenario single --grid-points 64 --out oc_bad.json");
    CHECK(coarse.exit_code == 1);
    CHECK(coarse.err.find("grid guard") != std::string::npos);

    CHECK(run_cli("oracle-check --scenario two_mode --grid-points 600 --out oc_bad.json")
              .exit_code == 1);

    const RunResult strict =
        run_cli("oracle-check --scenario single --tol 1e-18 --out oc_strict.json");
    CHECK(strict.exit_code == 2);
    // The report is still written so the discrepancy can be inspected.
    CHECK(load_json("oc_strict.json")["report"]["pass"] == false);
}

TEST_CASE("reports go to stdout when no output path is given") {
    const RunResult r = run_cli("concentrate --single --r 0 --x0 1 --seed 2");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["report"]["copies_used"] == 2);
}
