// Copyright 2026 The cvsqueeze Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Exit codes: 0 success, 1 usage or validation
// error, 2 numerical check failure. Reports are JSON with a deterministic
// body; wall-clock data lives only under the "meta" key.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvsqueeze/errors.hpp"
#include "cvsqueeze/gauss_ops.hpp"
#include "cvsqueeze/gaussian_state.hpp"
#include "cvsqueeze/metrics.hpp"
#include "cvsqueeze/parallel.hpp"
#include "cvsqueeze/protocols.hpp"
#include "cvsqueeze/rng.hpp"
#include "cvsqueeze/wigner.hpp"

using namespace cvsqueeze;

namespace {

struct RunConfig {
    std::string subcommand;
    // State preparation.
    std::string type = "single"; // single | epr
    double r = 0.0;
    double r1 = 0.5;
    double r2 = 0.5;
    std::string x0 = "0"; // number or "random:lo,hi"
    std::string input;    // state JSON path, replaces the preparation flags
    // Protocol.
    int copies = 2;
    std::string pairing = "binary_tree";
    std::string quadrature = "x";
    std::optional<double> gain; // custom feedforward gain, two copies only
    std::vector<double> forced_outcomes;
    std::uint64_t seed = 2026;
    // Output.
    std::string out;
    std::string state_out;
    std::string format = "json"; // json | csv
    // Monte Carlo.
    int trials = 100000;
    // Sweep grid.
    double r_from = 0.0;
    double r_to = 1.0;
    double r_step = 0.1;
    // Oracle grid.
    std::string scenario = "single"; // single | two_mode | single_wigner
    int grid_points = 0;             // 0 picks the scenario default
    double n_sigmas = 8.0;
    double tol = 1e-3;
    bool use_fft = true;
};

void to_json(nlohmann::json &j, const RunConfig &c) {
    j = nlohmann::json{
        {"schema_version", 1},
        {"subcommand", c.subcommand},
        {"type", c.type},
        {"r", c.r},
        {"r1", c.r1},
        {"r2", c.r2},
        {"x0", c.x0},
        {"input", c.input},
        {"copies", c.copies},
        {"pairing", c.pairing},
        {"quadrature", c.quadrature},
        {"gain", c.gain ? nlohmann::json(*c.gain) : nlohmann::json(nullptr)},
        {"forced_outcomes", c.forced_outcomes},
        {"seed", c.seed},
        {"out", c.out},
        {"state_out", c.state_out},
        {"format", c.format},
        {"trials", c.trials},
        {"r_from", c.r_from},
        {"r_to", c.r_to},
        {"r_step", c.r_step},
        {"scenario", c.scenario},
        {"grid_points", c.grid_points},
        {"n_sigmas", c.n_sigmas},
        {"tol", c.tol},
        {"use_fft", c.use_fft},
    };
}

template <typename T> void get_if_present(const nlohmann::json &j, const char *key, T &dst) {
    if (j.contains(key)) {
        dst = j.at(key).get<T>();
    }
}

/// Applies the fields present in j on top of the current values, so a
/// partial config file is valid and a full one round-trips unchanged.
void apply_config_json(RunConfig &c, const nlohmann::json &j) {
    if (!j.is_object()) {
        throw std::invalid_argument("config file: expected a JSON object");
    }
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != 1) {
        throw std::invalid_argument("config file: unsupported schema_version");
    }
    if (j.contains("subcommand")) {
        const auto sub = j.at("subcommand").get<std::string>();
        if (!sub.empty() && sub != c.subcommand) {
            throw std::invalid_argument("config file targets subcommand '" + sub +
                                        "', not '" + c.subcommand + "'");
        }
    }
    get_if_present(j, "type", c.type);
    get_if_present(j, "r", c.r);
    get_if_present(j, "r1", c.r1);
    get_if_present(j, "r2", c.r2);
    get_if_present(j, "x0", c.x0);
    get_if_present(j, "input", c.input);
    get_if_present(j, "copies", c.copies);
    get_if_present(j, "pairing", c.pairing);
    get_if_present(j, "quadrature", c.quadrature);
    if (j.contains("gain")) {
        const auto &g = j.at("gain");
        c.gain = g.is_null() ? std::nullopt : std::optional<double>(g.get<double>());
    }
    get_if_present(j, "forced_outcomes", c.forced_outcomes);
    get_if_present(j, "seed", c.seed);
    get_if_present(j, "out", c.out);
    get_if_present(j, "state_out", c.state_out);
    get_if_present(j, "format", c.format);
    get_if_present(j, "trials", c.trials);
    get_if_present(j, "r_from", c.r_from);
    get_if_present(j, "r_to", c.r_to);
    get_if_present(j, "r_step", c.r_step);
    get_if_present(j, "scenario", c.scenario);
    get_if_present(j, "grid_points", c.grid_points);
    get_if_present(j, "n_sigmas", c.n_sigmas);
    get_if_present(j, "tol", c.tol);
    get_if_present(j, "use_fft", c.use_fft);
}

std::string iso_timestamp() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::invalid_argument("cannot open for writing: " + path);
    }
    f << content;
    if (!f.good()) {
        throw std::invalid_argument("write failed: " + path);
    }
}

void emit(const std::string &path, const std::string &content) {
    if (path.empty()) {
        std::cout << content;
    } else {
        write_text_file(path, content);
    }
}

/// Deterministic body plus config echo; only "meta" may vary run to run.
std::string render_report(const RunConfig &cfg, nlohmann::json body) {
    nlohmann::json j{
        {"schema_version", 1},
        {"meta", {{"tool", "cvsqueeze"}, {"timestamp", iso_timestamp()}}},
        {"config", cfg},
        {"report", std::move(body)},
    };
    return j.dump(2) + "\n";
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

GaussianState prepare_copy(const RunConfig &cfg, double x0) {
    if (cfg.type == "epr") {
        return prepare_epr({cfg.r1, cfg.r2, x0});
    }
    if (cfg.type == "single") {
        return prepare_single({cfg.r, x0});
    }
    throw std::invalid_argument("unknown state type '" + cfg.type +
                                "' (expected single or epr)");
}

int cmd_prepare(const RunConfig &cfg) {
    if (cfg.out.empty()) {
        throw std::invalid_argument("prepare: --out is required");
    }
    if (cfg.format != "json") {
        throw std::invalid_argument("prepare: only json output is supported");
    }
    RngStream rng(cfg.seed, "prepare");
    const double x0 = X0Spec::parse(cfg.x0).sample(rng);
    write_state_file(cfg.out, prepare_copy(cfg, x0));
    return 0;
}

int cmd_concentrate(const RunConfig &cfg) {
    if (cfg.format != "json") {
        throw std::invalid_argument("concentrate: only json output is supported");
    }
    const Pairing pairing = pairing_from_string(cfg.pairing);
    const Quadrature quad = quadrature_from_string(cfg.quadrature);
    RngStream rng(cfg.seed, "concentrate");

    GaussianState copy;
    if (!cfg.input.empty()) {
        copy = read_state_file(cfg.input);
    } else {
        copy = prepare_copy(cfg, X0Spec::parse(cfg.x0).sample(rng));
    }

    std::optional<std::vector<double>> forced;
    if (!cfg.forced_outcomes.empty()) {
        forced = cfg.forced_outcomes;
    }

    GaussianState out;
    ProtocolReport report;
    if (cfg.gain) {
        if (cfg.copies != 2 || copy.n_modes() != 1 || quad != Quadrature::X) {
            throw std::invalid_argument(
                "concentrate: --gain requires two single-mode copies and quadrature x");
        }
        std::optional<double> f;
        if (forced) {
            if (forced->size() != 1) {
                throw std::invalid_argument("concentrate: a --gain run takes one forced outcome");
            }
            f = forced->front();
        }
        std::tie(out, report) = concentrate_single(copy, copy, *cfg.gain, f, rng);
    } else {
        ConcentrateConfig pc;
        pc.n_copies = cfg.copies;
        pc.pairing = pairing;
        pc.quadrature = quad;
        pc.forced_outcomes = forced;
        std::tie(out, report) = concentrate_n([&copy] { return copy; }, pc, rng);
        // Standard-gain runs must reproduce the 1/N variance rule and
        // keep the concentrated mean; a custom gain intentionally breaks
        // these, so the checks are skipped above.
        for (int m = 0; m < out.n_modes(); ++m) {
            const double before = copy.var_of(m, quad);
            const double after = out.var_of(m, quad);
            const double check_tol = 1e-9 * std::max(1.0, before);
            if (std::abs(after - before / cfg.copies) > check_tol) {
                throw NumericalError("concentrate self-check: mode " + std::to_string(m) +
                                     " variance " + std::to_string(after) + " is not input/" +
                                     std::to_string(cfg.copies));
            }
        }
        if (report.mean_preservation_error > 1e-9) {
            throw NumericalError("concentrate self-check: concentrated mean moved by " +
                                 std::to_string(report.mean_preservation_error));
        }
    }
    out.assert_physical();
    report.validate();

    nlohmann::json body = to_json(report);
    body["seed_info"] = rng.describe();
    emit(cfg.out, render_report(cfg, std::move(body)));
    if (!cfg.state_out.empty()) {
        write_state_file(cfg.state_out, out);
    }
    return 0;
}

int cmd_sweep(const RunConfig &cfg) {
    if (cfg.out.empty()) {
        throw std::invalid_argument("sweep: --out is required");
    }
    if (cfg.format != "csv") {
        throw std::invalid_argument("sweep: only csv output is supported");
    }
    if (!(cfg.r_step > 0.0)) {
        throw std::invalid_argument("sweep: --r-step must be positive");
    }
    if (cfg.r_to < cfg.r_from) {
        throw std::invalid_argument("sweep: empty grid (--r-to below --r-from)");
    }
    const int rows = static_cast<int>(std::floor((cfg.r_to - cfg.r_from) / cfg.r_step + 1e-9)) + 1;
    const X0Spec x0spec = X0Spec::parse(cfg.x0);
    RngStream rng(cfg.seed, "sweep");

    std::vector<std::string> lines(static_cast<std::size_t>(rows));
    parallel_for(static_cast<std::size_t>(rows), [&](std::size_t i) {
        const double r = cfg.r_from + cfg.r_step * static_cast<double>(i);
        RngStream row_rng = rng.substream(i);
        const double x0 = x0spec.sample(row_rng);
        const GaussianState copy = prepare_epr({r, r, x0});
        auto [out, report] = concentrate_two_mode(copy, copy, std::nullopt, std::nullopt, row_rng);
        const double purity_in = marginal_purity(copy, 0);
        const double purity_out = marginal_purity(out, 0);
        if (std::abs(purity_in - purity_out) > 1e-9) {
            throw NumericalError("sweep self-check: marginal purity changed at r = " +
                                 std::to_string(r));
        }
        const double logneg_in = log_negativity(copy);
        const double logneg_out = log_negativity(out);
        if (std::abs(logneg_in - logneg_out) > 1e-9) {
            throw NumericalError("sweep self-check: log-negativity changed at r = " +
                                 std::to_string(r));
        }
        const auto [sp, sm] = sigma_pm(out);
        lines[i] = csv_number(r) + "," + csv_number(sp) + "," + csv_number(sm) + "," +
                   csv_number(purity_out) + "," + csv_number(logneg_out) + "," +
                   csv_number(report.mean_preservation_error) + "\n";
    });

    std::string csv = "r,sigma_plus,sigma_minus,purity_P,logneg,mean_err\n";
    for (const std::string &line : lines) {
        csv += line;
    }
    write_text_file(cfg.out, csv);
    return 0;
}

int cmd_montecarlo(const RunConfig &cfg) {
    if (cfg.format != "json") {
        throw std::invalid_argument("montecarlo: only json output is supported");
    }
    if (cfg.trials < 100 || cfg.trials > 10000000) {
        throw std::invalid_argument("montecarlo: --trials must be in [100, 10000000]");
    }
    MonteCarloConfig mc;
    mc.r = cfg.r;
    mc.x0 = X0Spec::parse(cfg.x0);
    mc.protocol.n_copies = cfg.copies;
    mc.protocol.pairing = pairing_from_string(cfg.pairing);
    mc.protocol.quadrature = quadrature_from_string(cfg.quadrature);
    mc.n_trials = cfg.trials;

    RngStream rng(cfg.seed, "mc");
    const MonteCarloStats stats = monte_carlo_run(mc, rng);

    // Control population with a fixed displacement: the homodyne outcome
    // distribution must not move when x0 does.
    MonteCarloConfig control = mc;
    control.x0 = X0Spec::fixed(1.7);
    RngStream control_rng = rng.substream(static_cast<std::uint64_t>(cfg.trials) + 1);
    const MonteCarloStats control_stats = monte_carlo_run(control, control_rng);

    const double ks = ks_statistic(stats.outcomes, control_stats.outcomes);
    const double ks_threshold =
        ks_critical_value(0.01, stats.outcomes.size(), control_stats.outcomes.size());

    const bool mean_ok = std::abs(stats.mean_error) <= 3.0 * stats.mean_error_se;
    const bool var_ok = std::abs(stats.empirical_variance - stats.expected_variance) <=
                        0.01 * stats.expected_variance;
    const bool ks_ok = ks < ks_threshold;

    nlohmann::json body{
        {"stats", to_json(stats)},
        {"control", to_json(control_stats)},
        {"control_x0", control.x0.str()},
        {"ks", {{"statistic", ks}, {"threshold", ks_threshold}, {"alpha", 0.01}, {"pass", ks_ok}}},
        {"checks",
         {{"mean_within_3se", mean_ok},
          {"variance_within_1pct", var_ok},
          {"outcomes_independent_of_x0", ks_ok}}},
        {"seed_info", rng.describe()},
    };
    emit(cfg.out, render_report(cfg, std::move(body)));
    if (!(mean_ok && var_ok && ks_ok)) {
        throw NumericalError("monte carlo self-checks failed (mean_within_3se=" +
                             std::string(mean_ok ? "true" : "false") + ", variance_within_1pct=" +
                             std::string(var_ok ? "true" : "false") +
                             ", outcomes_independent_of_x0=" +
                             std::string(ks_ok ? "true" : "false") + ")");
    }
    return 0;
}

struct GridGuard {
    int lo;
    int hi;
    int fallback;
};

GridGuard scenario_guard(const std::string &scenario) {
    if (scenario == "single") {
        return {128, 4096, 1024};
    }
    if (scenario == "two_mode") {
        return {128, 512, 256};
    }
    if (scenario == "single_wigner") {
        return {64, 128, 127};
    }
    throw std::invalid_argument("unknown scenario '" + scenario +
                                "' (expected single, two_mode or single_wigner)");
}

int cmd_oracle_check(const RunConfig &cfg) {
    if (cfg.format != "json") {
        throw std::invalid_argument("oracle-check: only json output is supported");
    }
    const GridGuard guard = scenario_guard(cfg.scenario);
    const int n = cfg.grid_points == 0 ? guard.fallback : cfg.grid_points;
    if (n < guard.lo || n > guard.hi) {
        throw std::invalid_argument(
            "grid guard: scenario '" + cfg.scenario + "' needs " + std::to_string(guard.lo) +
            " to " + std::to_string(guard.hi) + " points per axis, got " + std::to_string(n) +
            "; grids outside this window cannot certify the agreement bound");
    }
    if (!(cfg.tol > 0.0)) {
        throw std::invalid_argument("oracle-check: --tol must be positive");
    }
    OracleOptions opts;
    opts.n = n;
    opts.n_sigmas = cfg.n_sigmas;
    opts.use_fft = cfg.use_fft;

    RngStream rng(cfg.seed, "oracle");
    const double x0 = X0Spec::parse(cfg.x0).sample(rng);

    nlohmann::json body{{"scenario", cfg.scenario}, {"grid_points", n},
                        {"n_sigmas", cfg.n_sigmas}, {"tolerance", cfg.tol}};
    double worst = 0.0;

    if (cfg.scenario == "two_mode") {
        RunConfig prep = cfg;
        prep.type = "epr";
        const GaussianState copy = prepare_copy(prep, x0);
        auto [engine_out, report] = concentrate_two_mode(copy, copy, 0.0, 0.0, rng);
        const MarginalsTwoMode oracle = oracle_two_mode(copy, copy, opts);
        const Moments2 ox = oracle.x.moments();
        const Moments2 op = oracle.p.moments();
        auto engine_block = [&](Quadrature q) {
            const int qa = quad_index(0, q);
            const int qb = quad_index(1, q);
            return nlohmann::json{{"mean", {engine_out.mean()(qa), engine_out.mean()(qb)}},
                                  {"var", {engine_out.cov()(qa, qa), engine_out.cov()(qb, qb)}},
                                  {"cov", engine_out.cov()(qa, qb)}};
        };
        auto oracle_block = [](const Moments2 &m) {
            return nlohmann::json{{"mean", {m.mean_a, m.mean_b}},
                                  {"var", {m.var_a, m.var_b}},
                                  {"cov", m.cov_ab}};
        };
        body["engine"] = {{"x", engine_block(Quadrature::X)}, {"p", engine_block(Quadrature::P)}};
        body["oracle"] = {{"x", oracle_block(ox)}, {"p", oracle_block(op)}};
        const OracleComparison cmp = compare_two_mode(copy, copy, engine_out, opts);
        body["discrepancy"] = {{"sup_x", cmp.sup_x},
                               {"sup_p", cmp.sup_p},
                               {"moment_x", cmp.moment_x},
                               {"moment_p", cmp.moment_p}};
        worst = cmp.worst();
    } else {
        RunConfig prep = cfg;
        prep.type = "single";
        const GaussianState copy = prepare_copy(prep, x0);
        auto [engine_out, report] = concentrate_single(copy, copy, 0.5, 0.0, rng);
        body["engine"] = {{"mean_x", engine_out.mean_of(0, Quadrature::X)},
                          {"var_x", engine_out.var_of(0, Quadrature::X)},
                          {"mean_p", engine_out.mean_of(0, Quadrature::P)},
                          {"var_p", engine_out.var_of(0, Quadrature::P)}};
        if (cfg.scenario == "single") {
            const MarginalsSingle oracle = oracle_single(copy, copy, opts);
            const Moments1 ox = oracle.x.moments();
            const Moments1 op = oracle.p.moments();
            body["oracle"] = {{"mean_x", ox.mean},
                              {"var_x", ox.variance},
                              {"mean_p", op.mean},
                              {"var_p", op.variance}};
            const OracleComparison cmp = compare_single(copy, copy, engine_out, opts);
            body["discrepancy"] = {{"sup_x", cmp.sup_x},
                                   {"sup_p", cmp.sup_p},
                                   {"moment_x", cmp.moment_x},
                                   {"moment_p", cmp.moment_p}};
            worst = cmp.worst();
        } else {
            const Grid2D full = oracle_single_wigner(copy, copy, opts);
            const MarginalsSingle direct = oracle_single(copy, copy, opts);
            const Grid1D wx = full.marginal_a();
            const Grid1D wp = full.marginal_b();
            const Moments1 ox = wx.moments();
            const Moments1 op = wp.moments();
            body["oracle"] = {{"mean_x", ox.mean},
                              {"var_x", ox.variance},
                              {"mean_p", op.mean},
                              {"var_p", op.variance}};
            const double l1_x = l1_distance(wx, direct.x);
            const double l1_p = l1_distance(wp, direct.p);
            const double mx = engine_out.mean_of(0, Quadrature::X);
            const double vx = engine_out.var_of(0, Quadrature::X);
            const double mp = engine_out.mean_of(0, Quadrature::P);
            const double vp = engine_out.var_of(0, Quadrature::P);
            const double sup_x =
                max_abs_difference(wx, [&](double x) { return gaussian_pdf(x, mx, vx); });
            const double sup_p =
                max_abs_difference(wp, [&](double p) { return gaussian_pdf(p, mp, vp); });
            const double moment_x = std::max(std::abs(ox.mean - mx), std::abs(ox.variance - vx));
            const double moment_p = std::max(std::abs(op.mean - mp), std::abs(op.variance - vp));
            body["discrepancy"] = {{"sup_x", sup_x},   {"sup_p", sup_p},
                                   {"moment_x", moment_x}, {"moment_p", moment_p},
                                   {"l1_x", l1_x},     {"l1_p", l1_p}};
            worst = std::max({sup_x, sup_p, moment_x, moment_p, l1_x, l1_p});
        }
    }

    body["worst"] = worst;
    const bool pass = worst < cfg.tol;
    body["pass"] = pass;
    emit(cfg.out, render_report(cfg, std::move(body)));
    if (!pass) {
        throw NumericalError("oracle disagreement " + csv_number(worst) +
                             " exceeds tolerance " + csv_number(cfg.tol));
    }
    return 0;
}

/// Tracks which CLI options were actually given so flag values can
/// override config-file values, which override defaults.
struct Binder {
    std::vector<std::pair<CLI::Option *, std::function<void(RunConfig &, const RunConfig &)>>>
        items;

    template <typename T>
    CLI::Option *bind(CLI::App *sub, RunConfig &flags, const std::string &name,
                      T RunConfig::* field, const std::string &desc) {
        CLI::Option *opt = sub->add_option(name, flags.*field, desc);
        items.emplace_back(opt, [field](RunConfig &dst, const RunConfig &src) {
            dst.*field = src.*field;
        });
        return opt;
    }

    void overlay(RunConfig &dst, const RunConfig &src) const {
        for (const auto &[opt, copy_field] : items) {
            if (opt->count() > 0) {
                copy_field(dst, src);
            }
        }
    }
};

struct SubcommandState {
    RunConfig defaults;
    RunConfig flags;
    Binder binder;
    std::string config_path;
    std::string dump_config_path;
};

int run_with_precedence(SubcommandState &st, const std::function<int(const RunConfig &)> &fn) {
    RunConfig cfg = st.defaults;
    if (!st.config_path.empty()) {
        std::ifstream f(st.config_path);
        if (!f) {
            throw std::invalid_argument("cannot read config file: " + st.config_path);
        }
        apply_config_json(cfg, nlohmann::json::parse(f));
    }
    st.binder.overlay(cfg, st.flags);
    if (!st.dump_config_path.empty()) {
        write_text_file(st.dump_config_path, nlohmann::json(cfg).dump(2) + "\n");
    }
    return fn(cfg);
}

void add_common(CLI::App *sub, SubcommandState &st) {
    sub->add_option("--config", st.config_path,
                    "JSON config file; explicit flags override its values");
    sub->add_option("--dump-config", st.dump_config_path,
                    "write the effective config to this path before running");
    st.binder.bind(sub, st.flags, "--seed", &RunConfig::seed, "RNG seed")
        ->envname("CVSQUEEZE_SEED");
    st.binder.bind(sub, st.flags, "--out", &RunConfig::out, "output path (default: stdout)");
    st.binder.bind(sub, st.flags, "--format", &RunConfig::format, "output format: json or csv");
}

void add_state_prep(CLI::App *sub, SubcommandState &st) {
    CLI::Option *single = sub->add_flag_callback(
        "--single", [&st] { st.flags.type = "single"; }, "single-mode squeezed copy (default)");
    CLI::Option *epr = sub->add_flag_callback(
        "--epr", [&st] { st.flags.type = "epr"; }, "two-mode squeezed (EPR-correlated) copy");
    single->excludes(epr);
    st.binder.items.emplace_back(single, [](RunConfig &dst, const RunConfig &src) {
        dst.type = src.type;
    });
    st.binder.items.emplace_back(epr, [](RunConfig &dst, const RunConfig &src) {
        dst.type = src.type;
    });
    st.binder.bind(sub, st.flags, "--r", &RunConfig::r, "single-mode squeezing parameter");
    st.binder.bind(sub, st.flags, "--r1", &RunConfig::r1, "EPR squeezing of the X_A+X_B variance");
    st.binder.bind(sub, st.flags, "--r2", &RunConfig::r2, "EPR squeezing of the X_A-X_B variance");
    st.binder.bind(sub, st.flags, "--x0", &RunConfig::x0,
                   "displacement: a number or random:lo,hi");
}

void add_protocol(CLI::App *sub, SubcommandState &st) {
    st.binder.bind(sub, st.flags, "--copies", &RunConfig::copies, "number of identical copies");
    st.binder.bind(sub, st.flags, "--pairing", &RunConfig::pairing,
                   "merge order: binary_tree or sequential");
    st.binder.bind(sub, st.flags, "--quadrature", &RunConfig::quadrature,
                   "concentrated quadrature: x or p");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Gaussian squeezing-concentration toolkit: exact covariance engine "
                 "with a grid-integration oracle"};
    app.require_subcommand(1);
    int exit_code = 0;

    SubcommandState prepare_st;
    prepare_st.defaults.subcommand = "prepare";
    prepare_st.flags = prepare_st.defaults;
    CLI::App *prepare = app.add_subcommand("prepare", "write a state JSON file");
    add_common(prepare, prepare_st);
    add_state_prep(prepare, prepare_st);
    prepare->callback([&] {
        exit_code = run_with_precedence(prepare_st, cmd_prepare);
    });

    SubcommandState conc_st;
    conc_st.defaults.subcommand = "concentrate";
    conc_st.flags = conc_st.defaults;
    CLI::App *conc = app.add_subcommand("concentrate", "run the N-copy concentration protocol");
    add_common(conc, conc_st);
    add_state_prep(conc, conc_st);
    add_protocol(conc, conc_st);
    CLI::Option *input_opt =
        conc_st.binder.bind(conc, conc_st.flags, "--input", &RunConfig::input,
                            "copy state from a JSON file instead of the preparation flags");
    input_opt->check(CLI::ExistingFile);
    conc_st.binder.bind(conc, conc_st.flags, "--state-out", &RunConfig::state_out,
                        "also write the output state JSON here");
    {
        CLI::Option *gopt = conc->add_option_function<double>(
            "--gain", [&conc_st](double v) { conc_st.flags.gain = v; },
            "custom feedforward gain (two single-mode copies only)");
        conc_st.binder.items.emplace_back(gopt, [](RunConfig &dst, const RunConfig &src) {
            dst.gain = src.gain;
        });
    }
    conc_st.binder.bind(conc, conc_st.flags, "--forced-outcome", &RunConfig::forced_outcomes,
                        "fix homodyne outcomes in merge order (repeatable)");
    conc->callback([&] {
        exit_code = run_with_precedence(conc_st, cmd_concentrate);
    });

    SubcommandState sweep_st;
    sweep_st.defaults.subcommand = "sweep";
    sweep_st.defaults.format = "csv";
    sweep_st.defaults.x0 = "0";
    sweep_st.flags = sweep_st.defaults;
    CLI::App *sweep = app.add_subcommand(
        "sweep", "two-mode protocol over r1=r2=r; CSV of post-protocol correlation data");
    add_common(sweep, sweep_st);
    sweep_st.binder.bind(sweep, sweep_st.flags, "--r-from", &RunConfig::r_from, "grid start");
    sweep_st.binder.bind(sweep, sweep_st.flags, "--r-to", &RunConfig::r_to, "grid end");
    sweep_st.binder.bind(sweep, sweep_st.flags, "--r-step", &RunConfig::r_step, "grid step");
    sweep_st.binder.bind(sweep, sweep_st.flags, "--x0", &RunConfig::x0,
                         "displacement per row: a number or random:lo,hi");
    sweep->callback([&] {
        exit_code = run_with_precedence(sweep_st, cmd_sweep);
    });

    SubcommandState mc_st;
    mc_st.defaults.subcommand = "montecarlo";
    mc_st.defaults.x0 = "random:-5,5";
    mc_st.flags = mc_st.defaults;
    CLI::App *mc = app.add_subcommand("montecarlo",
                                      "sampled protocol runs with statistical self-checks");
    add_common(mc, mc_st);
    add_protocol(mc, mc_st);
    mc_st.binder.bind(mc, mc_st.flags, "--r", &RunConfig::r, "single-mode squeezing parameter");
    mc_st.binder.bind(mc, mc_st.flags, "--x0", &RunConfig::x0,
                      "displacement: a number or random:lo,hi");
    mc_st.binder.bind(mc, mc_st.flags, "--trials", &RunConfig::trials, "number of trials");
    mc->callback([&] {
        exit_code = run_with_precedence(mc_st, cmd_montecarlo);
    });

    SubcommandState oc_st;
    oc_st.defaults.subcommand = "oracle-check";
    oc_st.defaults.x0 = "1";
    oc_st.defaults.r = 0.5;
    oc_st.flags = oc_st.defaults;
    CLI::App *oc = app.add_subcommand("oracle-check",
                                      "compare the covariance engine against grid integration");
    add_common(oc, oc_st);
    add_state_prep(oc, oc_st);
    oc_st.binder.bind(oc, oc_st.flags, "--scenario", &RunConfig::scenario,
                      "single, two_mode or single_wigner");
    oc_st.binder.bind(oc, oc_st.flags, "--grid-points", &RunConfig::grid_points,
                      "points per axis (0 = scenario default)");
    oc_st.binder.bind(oc, oc_st.flags, "--n-sigmas", &RunConfig::n_sigmas,
                      "half-width of grids in standard deviations");
    oc_st.binder.bind(oc, oc_st.flags, "--tol", &RunConfig::tol, "agreement tolerance");
    oc->add_flag_callback(
        "--no-fft", [&oc_st] { oc_st.flags.use_fft = false; },
        "use direct summation for plain convolutions");
    oc_st.binder.items.emplace_back(oc->get_option("--no-fft"),
                                    [](RunConfig &dst, const RunConfig &src) {
                                        dst.use_fft = src.use_fft;
                                    });
    oc->callback([&] {
        exit_code = run_with_precedence(oc_st, cmd_oracle_check);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericalError &e) {
        std::cerr << "numerical check failed: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
