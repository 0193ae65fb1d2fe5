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

#include "cvsqueeze/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cvsqueeze/errors.hpp"
#include "cvsqueeze/gauss_ops.hpp"

namespace cvsqueeze {

namespace {

void require_two_modes(const GaussianState &state, const char *what) {
    if (state.n_modes() != 2) {
        throw std::invalid_argument(std::string(what) + ": state must have exactly 2 modes");
    }
}

Eigen::VectorXd x_sum_weight(double sign) {
    Eigen::VectorXd w(4);
    w << 1.0, 0.0, sign, 0.0;
    return w;
}

} // namespace

std::pair<double, double> sigma_pm(const GaussianState &state) {
    require_two_modes(state, "sigma_pm");
    return {quad_variance(state, x_sum_weight(1.0)), quad_variance(state, x_sum_weight(-1.0))};
}

double marginal_purity(const GaussianState &state, int mode) {
    require_two_modes(state, "marginal_purity");
    const GaussianState reduced = state.reduced({mode});
    return 1.0 / (2.0 * std::sqrt(reduced.cov().determinant()));
}

double epr_marginal_purity(double sigma_plus, double sigma_minus) {
    if (sigma_plus <= 0.0 || sigma_minus <= 0.0) {
        throw std::invalid_argument("epr_marginal_purity: variances must be positive");
    }
    return 2.0 * std::sqrt(sigma_plus * sigma_minus) / (sigma_plus + sigma_minus);
}

double global_purity(const GaussianState &state) {
    if (state.n_modes() == 0) {
        return 1.0;
    }
    const double det = state.cov().determinant();
    return 1.0 / (std::pow(2.0, state.n_modes()) * std::sqrt(det));
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd &cov) {
    if (cov.rows() != cov.cols() || cov.rows() % 2 != 0 || cov.rows() == 0) {
        throw std::invalid_argument("symplectic_eigenvalues: cov must be 2n x 2n");
    }
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        throw std::invalid_argument("symplectic_eigenvalues: input is not symmetric");
    }
    const int n = static_cast<int>(cov.rows()) / 2;
    const Eigen::MatrixXd sym = (cov + cov.transpose()) / 2.0;
    const Eigen::MatrixXd m = symplectic_form(n) * sym;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symplectic_eigenvalues: eigensolver failed to converge");
    }
    // Spectrum of Omega cov is {±i nu_k}; collect |lambda| and keep every
    // second value after sorting to deduplicate the pairs.
    std::vector<double> magnitudes(2 * n);
    for (int k = 0; k < 2 * n; ++k) {
        magnitudes[k] = std::abs(solver.eigenvalues()(k));
    }
    std::sort(magnitudes.begin(), magnitudes.end());
    std::vector<double> nus(n);
    for (int k = 0; k < n; ++k) {
        nus[k] = (magnitudes[2 * k] + magnitudes[2 * k + 1]) / 2.0;
    }
    return nus;
}

double log_negativity(const GaussianState &state) {
    require_two_modes(state, "log_negativity");
    Eigen::MatrixXd pt = state.cov();
    pt.row(3) *= -1.0;
    pt.col(3) *= -1.0;
    double en = 0.0;
    for (double nu : symplectic_eigenvalues(pt)) {
        if (2.0 * nu < 1.0) {
            en -= std::log2(2.0 * nu);
        }
    }
    return en;
}

double von_neumann_entropy(const GaussianState &state) {
    if (state.n_modes() == 0) {
        return 0.0;
    }
    double entropy = 0.0;
    for (double nu : symplectic_eigenvalues(state.cov())) {
        const double a = nu + 0.5;
        const double b = nu - 0.5;
        entropy += a * std::log(a);
        if (b > 1e-14) {
            entropy -= b * std::log(b);
        }
    }
    return entropy;
}

CorrelationSummary correlation_summary(const GaussianState &state) {
    require_two_modes(state, "correlation_summary");
    CorrelationSummary s;
    const auto pm = sigma_pm(state);
    s.sigma_plus = pm.first;
    s.sigma_minus = pm.second;
    for (int i = 0; i < 2; ++i) {
        s.means[i] = {state.mean_of(i, Quadrature::X), state.mean_of(i, Quadrature::P)};
        for (int j = 0; j < 2; ++j) {
            s.v_x(i, j) = state.cov()(2 * i, 2 * j);
            s.v_p(i, j) = state.cov()(2 * i + 1, 2 * j + 1);
        }
    }
    s.var_p_sum = s.v_p(0, 0) + 2.0 * s.v_p(0, 1) + s.v_p(1, 1);
    s.var_p_diff = s.v_p(0, 0) - 2.0 * s.v_p(0, 1) + s.v_p(1, 1);
    return s;
}

} // namespace cvsqueeze
