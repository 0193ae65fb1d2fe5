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

#include "cvsqueeze/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cvsqueeze/errors.hpp"
#include "cvsqueeze/metrics.hpp"
#include "cvsqueeze/parallel.hpp"

namespace cvsqueeze {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Largest shift of the given quadrature's mean across modes.
double quad_mean_shift(const GaussianState &before, const GaussianState &after, Quadrature quad) {
    if (before.n_modes() != after.n_modes()) {
        throw std::invalid_argument("quad_mean_shift: mode count changed");
    }
    double worst = 0.0;
    for (int m = 0; m < before.n_modes(); ++m) {
        worst = std::max(worst, std::abs(after.mean_of(m, quad) - before.mean_of(m, quad)));
    }
    return worst;
}

/// Coupling used before the homodyne. For X it is the nondemolition sum
/// gate itself; for P it is the sum gate conjugated by quarter rotations
/// on both modes, which maps X_S to X_S + X_T and P_T to P_T - P_S.
SymplecticOp coupling_op(Quadrature quad) {
    SymplecticOp sum = sum_gate_op(2, 0, 1);
    if (quad == Quadrature::X) {
        return sum;
    }
    SymplecticOp quarter = phase_rotation_op(2, 0, kPi / 2).then(phase_rotation_op(2, 1, kPi / 2));
    SymplecticOp back = phase_rotation_op(2, 0, -kPi / 2).then(phase_rotation_op(2, 1, -kPi / 2));
    return quarter.then(sum).then(back);
}

GaussianState displace_along(const GaussianState &state, int mode, Quadrature quad,
                             double amount) {
    return quad == Quadrature::X ? displace(state, mode, amount, 0.0)
                                 : displace(state, mode, 0.0, amount);
}

struct MergeResult {
    GaussianState state;
    HomodyneRecord record;
    double gain = 0.0;
};

MergeResult merge_pair(const GaussianState &source, const GaussianState &target, double gain,
                       Quadrature quad, std::optional<double> forced, RngStream &rng) {
    if (source.n_modes() != 1 || target.n_modes() != 1) {
        throw std::invalid_argument("merge_pair: both copies must be single-mode");
    }
    if (!std::isfinite(gain)) {
        throw std::invalid_argument("merge_pair: gain must be finite");
    }
    GaussianState joint = coupling_op(quad).apply(tensor(source, target));
    auto [record, kept] = homodyne(joint, 1, quad, forced, rng);
    MergeResult result{displace_along(kept, 0, quad, gain * record.outcome), record, gain};
    return result;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

StateSummary summarize(const GaussianState &state) {
    if (state.n_modes() == 0) {
        throw std::invalid_argument("summarize: empty state");
    }
    StateSummary s;
    s.n_modes = state.n_modes();
    for (int m = 0; m < state.n_modes(); ++m) {
        s.mean_x.push_back(state.mean_of(m, Quadrature::X));
        s.mean_p.push_back(state.mean_of(m, Quadrature::P));
        s.var_x.push_back(state.var_of(m, Quadrature::X));
        s.var_p.push_back(state.var_of(m, Quadrature::P));
        s.marginal_purity.push_back(global_purity(state.reduced({m})));
    }
    s.global_purity = global_purity(state);
    if (state.n_modes() == 2) {
        const auto [sp, sm] = sigma_pm(state);
        s.sigma_plus = sp;
        s.sigma_minus = sm;
        s.log_negativity = log_negativity(state);
    }
    return s;
}

nlohmann::json to_json(const StateSummary &summary) {
    nlohmann::json j{
        {"n_modes", summary.n_modes},         {"mean_x", summary.mean_x},
        {"mean_p", summary.mean_p},           {"var_x", summary.var_x},
        {"var_p", summary.var_p},             {"global_purity", summary.global_purity},
        {"marginal_purity", summary.marginal_purity},
    };
    if (summary.sigma_plus) {
        j["sigma_plus"] = *summary.sigma_plus;
        j["sigma_minus"] = *summary.sigma_minus;
        j["log_negativity"] = *summary.log_negativity;
    }
    return j;
}

void ProtocolReport::validate() const {
    if (copies_used < 1) {
        throw NumericalError("protocol report: copies_used must be positive");
    }
    auto check_summary = [](const StateSummary &s, const char *which) {
        for (double v : s.var_x) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NumericalError(std::string("protocol report: nonpositive X variance in ") +
                                     which);
            }
        }
        for (double v : s.var_p) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw NumericalError(std::string("protocol report: nonpositive P variance in ") +
                                     which);
            }
        }
        if (!(s.global_purity > 0.0) || s.global_purity > 1.0 + 1e-9) {
            throw NumericalError(std::string("protocol report: purity out of range in ") + which);
        }
    };
    check_summary(input, "input");
    check_summary(output, "output");
    if (!std::isfinite(mean_preservation_error) || mean_preservation_error < 0.0) {
        throw NumericalError("protocol report: invalid mean preservation error");
    }
    for (const HomodyneRecord &rec : trace) {
        if (!std::isfinite(rec.outcome)) {
            throw NumericalError("protocol report: non-finite homodyne outcome");
        }
    }
}

nlohmann::json to_json(const ProtocolReport &report) {
    nlohmann::json trace = nlohmann::json::array();
    for (const HomodyneRecord &rec : report.trace) {
        trace.push_back(nlohmann::json(rec));
    }
    return nlohmann::json{
        {"schema_version", 1},
        {"copies_used", report.copies_used},
        {"gains", report.gains},
        {"mean_preservation_error", report.mean_preservation_error},
        {"input", to_json(report.input)},
        {"output", to_json(report.output)},
        {"trace", trace},
    };
}

std::string to_string(Pairing pairing) {
    return pairing == Pairing::BinaryTree ? "binary_tree" : "sequential";
}

Pairing pairing_from_string(const std::string &text) {
    if (text == "binary_tree") {
        return Pairing::BinaryTree;
    }
    if (text == "sequential") {
        return Pairing::SequentialOptimalGain;
    }
    throw std::invalid_argument("unknown pairing '" + text +
                                "' (expected binary_tree or sequential)");
}

std::pair<GaussianState, ProtocolReport>
concentrate_single(const GaussianState &source, const GaussianState &target, double gain,
                   std::optional<double> forced_outcome, RngStream &rng) {
    MergeResult merged = merge_pair(source, target, gain, Quadrature::X, forced_outcome, rng);
    ProtocolReport report;
    report.input = summarize(source);
    report.output = summarize(merged.state);
    report.trace = {merged.record};
    report.gains = {gain};
    report.copies_used = 2;
    report.mean_preservation_error = quad_mean_shift(source, merged.state, Quadrature::X);
    report.validate();
    return {merged.state, report};
}

std::pair<GaussianState, ProtocolReport>
concentrate_two_mode(const GaussianState &source, const GaussianState &target,
                     std::optional<double> forced_a, std::optional<double> forced_b,
                     RngStream &rng) {
    if (source.n_modes() != 2 || target.n_modes() != 2) {
        throw std::invalid_argument("concentrate_two_mode: both copies must be two-mode");
    }
    // Joint layout: source modes 0, 1 and copy modes 2, 3. Each side
    // couples its own copy mode, so the operations stay local.
    GaussianState joint = tensor(source, target);
    joint = sum_gate(joint, 0, 2);
    joint = sum_gate(joint, 1, 3);
    auto [rec_a, after_a] = homodyne(joint, 2, Quadrature::X, forced_a, rng);
    // Removing mode 2 shifts the remaining copy mode from index 3 to 2.
    auto [rec_b, after_b] = homodyne(after_a, 2, Quadrature::X, forced_b, rng);
    GaussianState out = displace(after_b, 0, 0.5 * rec_a.outcome, 0.0);
    out = displace(out, 1, 0.5 * rec_b.outcome, 0.0);

    ProtocolReport report;
    report.input = summarize(source);
    report.output = summarize(out);
    report.trace = {rec_a, rec_b};
    report.gains = {0.5, 0.5};
    report.copies_used = 2;
    report.mean_preservation_error = quad_mean_shift(source, out, Quadrature::X);
    report.validate();
    return {out, report};
}

std::pair<GaussianState, ProtocolReport>
concentrate_n(const StateFactory &factory, const ConcentrateConfig &config, RngStream &rng) {
    if (config.n_copies < 2) {
        throw std::invalid_argument("concentrate_n: need at least two copies");
    }
    GaussianState first = factory();
    if (first.n_modes() != 1 && first.n_modes() != 2) {
        throw std::invalid_argument("concentrate_n: copies must have one or two modes");
    }
    const bool two_mode = first.n_modes() == 2;
    if (two_mode && config.pairing != Pairing::BinaryTree) {
        throw std::invalid_argument("concentrate_n: two-mode copies require binary_tree pairing");
    }
    if (two_mode && config.quadrature != Quadrature::X) {
        throw std::invalid_argument("concentrate_n: two-mode copies support X only");
    }
    if (config.pairing == Pairing::BinaryTree &&
        (config.n_copies & (config.n_copies - 1)) != 0) {
        throw std::invalid_argument("concentrate_n: binary_tree needs a power-of-two copy count");
    }
    const std::size_t n_events = static_cast<std::size_t>(config.n_copies - 1) * (two_mode ? 2 : 1);
    if (config.forced_outcomes && config.forced_outcomes->size() != n_events) {
        throw std::invalid_argument("concentrate_n: expected " + std::to_string(n_events) +
                                    " forced outcomes, got " +
                                    std::to_string(config.forced_outcomes->size()));
    }
    std::size_t cursor = 0;
    auto next_forced = [&]() -> std::optional<double> {
        if (!config.forced_outcomes) {
            return std::nullopt;
        }
        return (*config.forced_outcomes)[cursor++];
    };

    ProtocolReport report;
    report.input = summarize(first);
    report.copies_used = config.n_copies;

    GaussianState result;
    if (config.pairing == Pairing::BinaryTree) {
        std::vector<GaussianState> layer;
        layer.reserve(static_cast<std::size_t>(config.n_copies));
        layer.push_back(first);
        for (int i = 1; i < config.n_copies; ++i) {
            layer.push_back(factory());
        }
        while (layer.size() > 1) {
            std::vector<GaussianState> next;
            next.reserve(layer.size() / 2);
            for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
                if (two_mode) {
                    std::optional<double> fa = next_forced();
                    std::optional<double> fb = next_forced();
                    auto [merged, rep] = concentrate_two_mode(layer[i], layer[i + 1], fa, fb, rng);
                    report.trace.insert(report.trace.end(), rep.trace.begin(), rep.trace.end());
                    report.gains.insert(report.gains.end(), rep.gains.begin(), rep.gains.end());
                    next.push_back(merged);
                } else {
                    MergeResult merged = merge_pair(layer[i], layer[i + 1], 0.5, config.quadrature,
                                                    next_forced(), rng);
                    report.trace.push_back(merged.record);
                    report.gains.push_back(merged.gain);
                    next.push_back(merged.state);
                }
            }
            layer = std::move(next);
        }
        result = layer.front();
    } else {
        GaussianState acc = first;
        for (int k = 1; k < config.n_copies; ++k) {
            GaussianState fresh = factory();
            const double s = acc.var_of(0, config.quadrature);
            const double t = fresh.var_of(0, config.quadrature);
            MergeResult merged =
                merge_pair(acc, fresh, s / (s + t), config.quadrature, next_forced(), rng);
            report.trace.push_back(merged.record);
            report.gains.push_back(merged.gain);
            acc = merged.state;
        }
        result = acc;
    }

    report.output = summarize(result);
    report.mean_preservation_error = quad_mean_shift(first, result, config.quadrature);
    report.validate();
    return {result, report};
}

std::pair<GaussianState, ProtocolReport> single_copy_squeeze_baseline(const GaussianState &state) {
    // Squeezing by ln(2)/2 halves the X variance, matching the two-copy
    // noise without a second copy; the X mean pays a 1/sqrt(2) factor.
    const double r = 0.5 * std::log(2.0);
    GaussianState out = state;
    for (int m = 0; m < state.n_modes(); ++m) {
        out = squeeze(out, m, r);
    }
    ProtocolReport report;
    report.input = summarize(state);
    report.output = summarize(out);
    report.copies_used = 1;
    report.mean_preservation_error = quad_mean_shift(state, out, Quadrature::X);
    report.validate();
    return {out, report};
}

X0Spec X0Spec::fixed(double v) {
    X0Spec s;
    s.kind = Kind::Fixed;
    s.value = v;
    return s;
}

X0Spec X0Spec::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw std::invalid_argument("x0 range: need lo < hi");
    }
    X0Spec s;
    s.kind = Kind::Uniform;
    s.lo = lo;
    s.hi = hi;
    return s;
}

X0Spec X0Spec::parse(const std::string &text) {
    const std::string prefix = "random:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string body = text.substr(prefix.size());
        const std::size_t comma = body.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("x0 spec '" + text + "': expected random:lo,hi");
        }
        std::size_t used_lo = 0;
        std::size_t used_hi = 0;
        const std::string lo_text = body.substr(0, comma);
        const std::string hi_text = body.substr(comma + 1);
        const double lo = std::stod(lo_text, &used_lo);
        const double hi = std::stod(hi_text, &used_hi);
        if (used_lo != lo_text.size() || used_hi != hi_text.size()) {
            throw std::invalid_argument("x0 spec '" + text + "': trailing characters");
        }
        return uniform(lo, hi);
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
        throw std::invalid_argument("x0 spec '" + text + "': trailing characters");
    }
    return fixed(v);
}

double X0Spec::sample(RngStream &rng) const {
    if (kind == Kind::Fixed) {
        return value;
    }
    return rng.uniform(lo, hi);
}

std::string X0Spec::str() const {
    if (kind == Kind::Fixed) {
        return format_double(value);
    }
    return "random:" + format_double(lo) + "," + format_double(hi);
}

nlohmann::json to_json(const MonteCarloStats &stats) {
    return nlohmann::json{
        {"schema_version", 1},
        {"n_trials", stats.n_trials},
        {"mean_error", stats.mean_error},
        {"mean_error_se", stats.mean_error_se},
        {"empirical_variance", stats.empirical_variance},
        {"expected_variance", stats.expected_variance},
        {"outcome_mean", stats.outcome_mean},
        {"outcome_variance", stats.outcome_variance},
        {"expected_outcome_variance", stats.expected_outcome_variance},
    };
}

MonteCarloStats monte_carlo_run(const MonteCarloConfig &config, RngStream &rng) {
    if (config.n_trials < 2) {
        throw std::invalid_argument("monte_carlo_run: need at least two trials");
    }
    if (config.protocol.forced_outcomes) {
        throw std::invalid_argument("monte_carlo_run: forced outcomes are not allowed here");
    }
    const Quadrature quad = config.protocol.quadrature;

    // The conditional covariance never depends on the outcomes, so one
    // forced run pins the analytic targets for every trial.
    ConcentrateConfig ref_config = config.protocol;
    ref_config.forced_outcomes =
        std::vector<double>(static_cast<std::size_t>(config.protocol.n_copies - 1), 0.0);
    RngStream ref_rng(0, "mc-ref");
    auto [ref_state, ref_report] = concentrate_n(
        [&] { return prepare_single({config.r, 0.0}); }, ref_config, ref_rng);

    MonteCarloStats stats;
    stats.n_trials = config.n_trials;
    stats.expected_variance = ref_state.var_of(0, quad);
    stats.expected_outcome_variance = ref_report.trace.front().predicted_variance;
    const std::size_t n = static_cast<std::size_t>(config.n_trials);
    stats.outcomes.resize(n);
    stats.readout_errors.resize(n);

    parallel_for(n, [&](std::size_t t) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(t));
        const double x0 = config.x0.sample(stream);
        auto [out, report] = concentrate_n(
            [&] { return prepare_single({config.r, x0}); }, config.protocol, stream);
        const double target = quad == Quadrature::X ? x0 : 0.0;
        const double readout =
            out.mean_of(0, quad) + std::sqrt(out.var_of(0, quad)) * stream.normal();
        stats.readout_errors[t] = readout - target;
        stats.outcomes[t] = report.trace.front().outcome;
    });

    // Reduction order is fixed by trial index regardless of scheduling.
    double err_sum = 0.0;
    double out_sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        err_sum += stats.readout_errors[t];
        out_sum += stats.outcomes[t];
    }
    stats.mean_error = err_sum / static_cast<double>(n);
    stats.outcome_mean = out_sum / static_cast<double>(n);
    double err_sq = 0.0;
    double out_sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double de = stats.readout_errors[t] - stats.mean_error;
        const double dm = stats.outcomes[t] - stats.outcome_mean;
        err_sq += de * de;
        out_sq += dm * dm;
    }
    stats.empirical_variance = err_sq / static_cast<double>(n - 1);
    stats.outcome_variance = out_sq / static_cast<double>(n - 1);
    stats.mean_error_se = std::sqrt(stats.empirical_variance / static_cast<double>(n));
    return stats;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_statistic: empty sample");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Evaluate only after both samples consumed every tie at the current
    // jump point, otherwise identical samples report a spurious gap.
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == t) {
            ++i;
        }
        while (j < b.size() && b[j] == t) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
    if (!(alpha > 0.0 && alpha < 1.0) || n == 0 || m == 0) {
        throw std::invalid_argument("ks_critical_value: bad arguments");
    }
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return c * std::sqrt((nn + mm) / (nn * mm));
}

} // namespace cvsqueeze
