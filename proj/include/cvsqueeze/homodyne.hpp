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

#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "cvsqueeze/gaussian_state.hpp"
#include "cvsqueeze/rng.hpp"

namespace cvsqueeze {

/// One homodyne event: which quadrature was read out, the value obtained,
/// and the Gaussian it was (or would have been) drawn from.
struct HomodyneRecord {
    int mode = 0;
    Quadrature quadrature = Quadrature::X;
    double outcome = 0.0;
    double predicted_mean = 0.0;
    double predicted_variance = 0.0;
    std::string seed_info; // RNG stream identifier, or "forced"
};

void to_json(nlohmann::json &j, const HomodyneRecord &r);
void from_json(const nlohmann::json &j, HomodyneRecord &r);

/// Marginal (mean, variance) of the chosen quadrature.
std::pair<double, double> outcome_distribution(const GaussianState &state, int mode,
                                               Quadrature quadrature);

/// Ideal homodyne detection of one quadrature. The outcome is
/// forced_outcome when given, otherwise sampled from the marginal. The
/// measured mode is removed and the remaining modes are conditioned:
/// with cov blocks A (kept), B (measured 2x2), C (cross) and the
/// measured-quadrature variance b = B_qq,
///   cov'  = A - c c^T / b,     c = C e_q,
///   mean' = a + c (outcome - b_q) / b.
/// Throws NumericalError if b < 1e-12 (already-deterministic quadrature).
std::pair<HomodyneRecord, GaussianState> homodyne(const GaussianState &state, int mode,
                                                  Quadrature quadrature,
                                                  std::optional<double> forced_outcome,
                                                  RngStream &rng);

/// Forced-outcome variant needing no RNG.
std::pair<HomodyneRecord, GaussianState> homodyne(const GaussianState &state, int mode,
                                                  Quadrature quadrature, double forced_outcome);

} // namespace cvsqueeze
