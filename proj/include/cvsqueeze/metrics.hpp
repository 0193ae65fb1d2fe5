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

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvsqueeze/gaussian_state.hpp"

namespace cvsqueeze {

/// (Var(X_A + X_B), Var(X_A - X_B)) of a two-mode state.
std::pair<double, double> sigma_pm(const GaussianState &state);

/// Purity of one mode's reduced state, 1 / (2 sqrt(det cov_mode)).
double marginal_purity(const GaussianState &state, int mode);

/// Closed form 2 sqrt(s+ s-) / (s+ + s-) valid for two-mode squeezed vacua;
/// agrees with the determinant route on those states.
double epr_marginal_purity(double sigma_plus, double sigma_minus);

/// 1 / (2^n sqrt(det cov)); equals 1 iff the state is pure.
double global_purity(const GaussianState &state);

/// Symplectic spectrum of a 2n x 2n covariance matrix: the n positive
/// values nu_k with {±i nu_k} the spectrum of Omega cov. Sorted ascending.
/// Physical states have every nu >= 1/2. The input is symmetrized as
/// (cov + cov^T)/2 before the eigendecomposition and rejected if the
/// asymmetry exceeds 1e-10.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd &cov);

/// Logarithmic negativity of a two-mode state: sum of -log2(2 nu) over
/// symplectic eigenvalues nu < 1/2 of the partially transposed covariance
/// (sign flip of the P_B row and column).
double log_negativity(const GaussianState &state);

/// Von Neumann entropy in nats from the symplectic spectrum.
double von_neumann_entropy(const GaussianState &state);

/// Second-moment summary of a two-mode state in the (A, B) split.
struct CorrelationSummary {
    double sigma_plus = 0.0;
    double sigma_minus = 0.0;
    double var_p_sum = 0.0;
    double var_p_diff = 0.0;
    Eigen::Matrix2d v_x; // <Delta X_i Delta X_j>
    Eigen::Matrix2d v_p; // <Delta P_i Delta P_j>
    std::array<std::pair<double, double>, 2> means; // per-mode (x, p)
};

CorrelationSummary correlation_summary(const GaussianState &state);

} // namespace cvsqueeze
