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

#include "cvsqueeze/homodyne.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvsqueeze/errors.hpp"

namespace cvsqueeze {

namespace {
// Below this variance the measured quadrature is effectively a point mass
// and conditioning on it is singular.
constexpr double kSingularVarianceFloor = 1e-12;
} // namespace

void to_json(nlohmann::json &j, const HomodyneRecord &r) {
    j = nlohmann::json{{"mode", r.mode},
                       {"quadrature", to_string(r.quadrature)},
                       {"outcome", r.outcome},
                       {"predicted_mean", r.predicted_mean},
                       {"predicted_variance", r.predicted_variance},
                       {"seed_info", r.seed_info}};
}

void from_json(const nlohmann::json &j, HomodyneRecord &r) {
    r.mode = j.at("mode").get<int>();
    r.quadrature = quadrature_from_string(j.at("quadrature").get<std::string>());
    r.outcome = j.at("outcome").get<double>();
    r.predicted_mean = j.at("predicted_mean").get<double>();
    r.predicted_variance = j.at("predicted_variance").get<double>();
    r.seed_info = j.at("seed_info").get<std::string>();
}

std::pair<double, double> outcome_distribution(const GaussianState &state, int mode,
                                               Quadrature quadrature) {
    return {state.mean_of(mode, quadrature), state.var_of(mode, quadrature)};
}

namespace {

std::pair<HomodyneRecord, GaussianState> homodyne_impl(const GaussianState &state, int mode,
                                                       Quadrature quadrature,
                                                       std::optional<double> forced_outcome,
                                                       RngStream *rng) {
    if (state.n_modes() < 1) {
        throw std::invalid_argument("homodyne: state has no modes");
    }
    if (mode < 0 || mode >= state.n_modes()) {
        throw std::invalid_argument("homodyne: mode index out of range");
    }
    if (forced_outcome && !std::isfinite(*forced_outcome)) {
        throw std::invalid_argument("homodyne: forced outcome must be finite");
    }

    const auto [pred_mean, pred_var] = outcome_distribution(state, mode, quadrature);
    if (pred_var < kSingularVarianceFloor) {
        throw NumericalError("homodyne: measured quadrature variance below 1e-12, "
                             "conditioning is singular");
    }

    HomodyneRecord record;
    record.mode = mode;
    record.quadrature = quadrature;
    record.predicted_mean = pred_mean;
    record.predicted_variance = pred_var;
    if (forced_outcome) {
        record.outcome = *forced_outcome;
        record.seed_info = "forced";
    } else {
        record.outcome = rng->normal(pred_mean, std::sqrt(pred_var));
        record.seed_info = rng->describe();
    }

    const int n = state.n_modes();
    if (n == 1) {
        return {record, GaussianState()};
    }

    std::vector<int> kept;
    kept.reserve(n - 1);
    for (int m = 0; m < n; ++m) {
        if (m != mode) {
            kept.push_back(m);
        }
    }

    const int q = quad_index(mode, quadrature);
    Eigen::VectorXd a(2 * (n - 1));
    Eigen::MatrixXd cov_kept(2 * (n - 1), 2 * (n - 1));
    Eigen::VectorXd c(2 * (n - 1)); // cross covariances with the measured quadrature
    for (int i = 0; i < n - 1; ++i) {
        for (int qi = 0; qi < 2; ++qi) {
            const int src = 2 * kept[i] + qi;
            const int dst = 2 * i + qi;
            a(dst) = state.mean()(src);
            c(dst) = state.cov()(src, q);
            for (int j = 0; j < n - 1; ++j) {
                for (int qj = 0; qj < 2; ++qj) {
                    cov_kept(dst, 2 * j + qj) = state.cov()(src, 2 * kept[j] + qj);
                }
            }
        }
    }

    // Rank-1 Schur complement on the measured quadrature. The conditional
    // covariance does not depend on the outcome value.
    Eigen::MatrixXd cov_out = cov_kept - (c * c.transpose()) / pred_var;
    cov_out = ((cov_out + cov_out.transpose()) / 2.0).eval();
    Eigen::VectorXd mean_out = a + c * ((record.outcome - pred_mean) / pred_var);
    return {record, GaussianState(std::move(mean_out), std::move(cov_out))};
}

} // namespace

std::pair<HomodyneRecord, GaussianState> homodyne(const GaussianState &state, int mode,
                                                  Quadrature quadrature,
                                                  std::optional<double> forced_outcome,
                                                  RngStream &rng) {
    return homodyne_impl(state, mode, quadrature, forced_outcome, &rng);
}

std::pair<HomodyneRecord, GaussianState> homodyne(const GaussianState &state, int mode,
                                                  Quadrature quadrature, double forced_outcome) {
    return homodyne_impl(state, mode, quadrature, forced_outcome, nullptr);
}

} // namespace cvsqueeze
