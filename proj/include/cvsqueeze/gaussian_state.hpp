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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

namespace cvsqueeze {

/// Conventions used throughout: hbar = 1, [X, P] = i, vacuum variance 1/2
/// per quadrature, quadratures ordered (x1, p1, x2, p2, ...).
inline constexpr double kVacuumVariance = 0.5;

enum class Quadrature { X, P };

/// Index of (mode, quadrature) in the xpxp-ordered vectors.
inline int quad_index(int mode, Quadrature q) {
    return 2 * mode + (q == Quadrature::P ? 1 : 0);
}

std::string to_string(Quadrature q);
Quadrature quadrature_from_string(const std::string &s);

/// Gaussian state of n bosonic modes: first moments plus a symmetric
/// covariance matrix. Zero modes is allowed and represents the empty state
/// left after measuring out the last mode.
class GaussianState {
  public:
    /// The empty (zero-mode) state.
    GaussianState();

    /// Validates dimensions and symmetry (1e-12) and positive definiteness.
    /// The uncertainty bound is checked separately by assert_physical().
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    int n_modes() const { return n_modes_; }
    const Eigen::VectorXd &mean() const { return mean_; }
    const Eigen::MatrixXd &cov() const { return cov_; }

    double mean_of(int mode, Quadrature q) const;
    double var_of(int mode, Quadrature q) const;

    /// Reduced state on the given modes (partial trace over the rest).
    GaussianState reduced(const std::vector<int> &modes) const;

    /// True iff all symplectic eigenvalues are >= 1/2 - tol.
    bool is_physical(double tol = 1e-10) const;
    /// Throws NumericalError if the uncertainty bound is violated.
    void assert_physical(double tol = 1e-10) const;

    bool operator==(const GaussianState &other) const;

  private:
    int n_modes_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Product state a (x) b; modes of a come first.
GaussianState tensor(const GaussianState &a, const GaussianState &b);

/// Largest elementwise deviation between two states' means and covariances.
/// Mode counts must match.
double max_state_difference(const GaussianState &a, const GaussianState &b);

// JSON schema:
//   {"schema_version": 1, "n_modes": n, "ordering": "xpxp", "hbar": 1,
//    "vacuum_variance": 0.5, "mean": [...], "cov": [[...], ...]}
// Reading validates symmetry and the uncertainty bound and rejects states
// that violate either.
void to_json(nlohmann::json &j, const GaussianState &state);
void from_json(const nlohmann::json &j, GaussianState &state);

GaussianState read_state_file(const std::string &path);
void write_state_file(const std::string &path, const GaussianState &state);

} // namespace cvsqueeze
