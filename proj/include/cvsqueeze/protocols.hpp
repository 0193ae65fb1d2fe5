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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cvsqueeze/gauss_ops.hpp"
#include "cvsqueeze/gaussian_state.hpp"
#include "cvsqueeze/homodyne.hpp"
#include "cvsqueeze/rng.hpp"

namespace cvsqueeze {

/// Per-mode snapshot of a Gaussian state used inside protocol reports.
struct StateSummary {
    int n_modes = 0;
    std::vector<double> mean_x;
    std::vector<double> mean_p;
    std::vector<double> var_x;
    std::vector<double> var_p;
    double global_purity = 0.0;
    std::vector<double> marginal_purity;
    /// Populated only for two-mode states.
    std::optional<double> sigma_plus;
    std::optional<double> sigma_minus;
    std::optional<double> log_negativity;
};

StateSummary summarize(const GaussianState &state);

nlohmann::json to_json(const StateSummary &summary);

/// Full record of one protocol run: before/after summaries, every homodyne
/// event, the feedforward gains in merge order, and the residual shift of
/// the concentrated quadrature's mean.
struct ProtocolReport {
    StateSummary input;
    StateSummary output;
    std::vector<HomodyneRecord> trace;
    std::vector<double> gains;
    double mean_preservation_error = 0.0;
    int copies_used = 0;

    /// Throws NumericalError if the report violates basic sanity:
    /// positive variances, purities in (0, 1], at least one copy.
    void validate() const;
};

nlohmann::json to_json(const ProtocolReport &report);

/// How copies are merged when more than two are supplied.
enum class Pairing {
    /// Copies are merged in rounds of disjoint pairs; requires a
    /// power-of-two copy count. Every merge uses gain 1/2.
    BinaryTree,
    /// Copies fold into a running accumulator one at a time with the
    /// variance-matched gain s/(s+t) per merge.
    SequentialOptimalGain,
};

std::string to_string(Pairing pairing);
Pairing pairing_from_string(const std::string &text);

struct ConcentrateConfig {
    int n_copies = 2;
    Pairing pairing = Pairing::BinaryTree;
    Quadrature quadrature = Quadrature::X;
    /// When set, merge k consumes forced_outcomes[k] instead of sampling.
    /// Size must equal the number of homodyne events of the run.
    std::optional<std::vector<double>> forced_outcomes;
};

/// Merges two single-mode copies: a nondemolition coupling writes the
/// source quadrature onto the target, the target is measured, and the
/// source is displaced by gain times the outcome.
std::pair<GaussianState, ProtocolReport>
concentrate_single(const GaussianState &source, const GaussianState &target, double gain,
                   std::optional<double> forced_outcome, RngStream &rng);

/// Two-copy merge for two-mode states. Each side couples its own copy
/// mode, measures it, and applies the local correction with gain 1/2.
/// Only X concentration is supported here.
std::pair<GaussianState, ProtocolReport>
concentrate_two_mode(const GaussianState &source, const GaussianState &target,
                     std::optional<double> forced_a, std::optional<double> forced_b,
                     RngStream &rng);

using StateFactory = std::function<GaussianState()>;

/// Runs the full N-copy protocol. The factory must return identically
/// prepared copies; each call produces one fresh copy. Two-mode copies
/// are accepted with BinaryTree pairing and X quadrature only.
std::pair<GaussianState, ProtocolReport>
concentrate_n(const StateFactory &factory, const ConcentrateConfig &config, RngStream &rng);

/// Reference strategy: no second copy, just squeeze each mode so the
/// noise matches the two-copy result. The mean shrinks by 1/sqrt(2).
std::pair<GaussianState, ProtocolReport> single_copy_squeeze_baseline(const GaussianState &state);

/// Distribution of the unknown displacement across Monte Carlo trials.
struct X0Spec {
    enum class Kind { Fixed, Uniform };
    Kind kind = Kind::Fixed;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    static X0Spec fixed(double v);
    static X0Spec uniform(double lo, double hi);
    /// Accepts "1.7" or "random:lo,hi".
    static X0Spec parse(const std::string &text);
    double sample(RngStream &rng) const;
    std::string str() const;
};

struct MonteCarloConfig {
    /// Squeezing of every copy; the displacement comes from x0 per trial.
    double r = 0.0;
    X0Spec x0;
    ConcentrateConfig protocol;
    int n_trials = 0;
};

struct MonteCarloStats {
    int n_trials = 0;
    /// Moments of (final readout - target mean) across trials.
    double mean_error = 0.0;
    double mean_error_se = 0.0;
    double empirical_variance = 0.0;
    /// Analytic variance of the concentrated quadrature of the output.
    double expected_variance = 0.0;
    /// First homodyne outcome of each trial, for distribution checks.
    double outcome_mean = 0.0;
    double outcome_variance = 0.0;
    double expected_outcome_variance = 0.0;
    std::vector<double> outcomes;
    std::vector<double> readout_errors;
};

nlohmann::json to_json(const MonteCarloStats &stats);

/// Trials use independent substreams of `rng` keyed by trial index, so the
/// aggregate is reproducible and independent of execution order.
MonteCarloStats monte_carlo_run(const MonteCarloConfig &config, RngStream &rng);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Rejection threshold c(alpha) * sqrt((n + m) / (n * m)).
double ks_critical_value(double alpha, std::size_t n, std::size_t m);

} // namespace cvsqueeze
