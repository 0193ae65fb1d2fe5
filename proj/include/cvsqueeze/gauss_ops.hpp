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

#include <cmath>

#include <Eigen/Dense>

#include "cvsqueeze/gaussian_state.hpp"

namespace cvsqueeze {

/// Symplectic form for n modes in xpxp ordering: block diagonal with
/// 2x2 blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(int n_modes);

/// Affine phase-space map R -> S R + d with S symplectic.
struct SymplecticOp {
    Eigen::MatrixXd S;
    Eigen::VectorXd d;

    static SymplecticOp identity(int n_modes);

    int n_modes() const { return static_cast<int>(S.rows()) / 2; }

    /// Max deviation of S Omega S^T from Omega.
    double symplectic_defect() const;
    bool is_symplectic(double tol = 1e-10) const;

    /// mean -> S mean + d, cov -> S cov S^T. Throws if the map is not
    /// symplectic to 1e-10 or the mode counts mismatch.
    GaussianState apply(const GaussianState &state) const;

    /// Composition: (next . this), i.e. this acts first.
    SymplecticOp then(const SymplecticOp &next) const;
};

// Gate builders. All act on an n-mode register and are identity elsewhere.

/// x -> e^{-r} x, p -> e^{+r} p on one mode (positive r squeezes x).
SymplecticOp squeeze_op(int n_modes, int mode, double r);

/// Phase-space rotation: x -> x cos(t) + p sin(t), p -> -x sin(t) + p cos(t).
SymplecticOp phase_rotation_op(int n_modes, int mode, double theta);

/// Two-mode mixer: X_i -> cos(t) X_i + sin(t) X_j,
/// X_j -> sin(t) X_i - cos(t) X_j, and identically on P. Balanced at t = pi/4.
SymplecticOp beamsplit_op(int n_modes, int i, int j, double theta);

/// QND coupling writing the source position onto the target:
/// X_T -> X_T - X_S, P_S -> P_S + P_T; X_S and P_T untouched. The momentum
/// sector is the unique completion preserving all canonical commutators.
SymplecticOp sum_gate_op(int n_modes, int source, int target);

SymplecticOp displace_op(int n_modes, int mode, double dx, double dp);

// State-level wrappers (pure: inputs are never mutated).

/// n-mode vacuum: zero mean, cov = I/2. Rejects n < 1.
GaussianState vacuum(int n_modes);
GaussianState displace(const GaussianState &state, int mode, double dx, double dp);
GaussianState squeeze(const GaussianState &state, int mode, double r);
GaussianState phase_rotate(const GaussianState &state, int mode, double theta);
GaussianState beamsplit(const GaussianState &state, int i, int j, double theta);
GaussianState sum_gate(const GaussianState &state, int source, int target);

/// Two-mode squeezed vacuum with Var(X_A + X_B) = e^{2 r1},
/// Var(X_A - X_B) = e^{-2 r2}, and <X_A> displaced by x0.
struct EprParams {
    double r1 = 0.0;
    double r2 = 0.0;
    double x0 = 0.0;

    double sigma_plus() const { return std::exp(2.0 * r1); }
    double sigma_minus() const { return std::exp(-2.0 * r2); }
};

/// Single-mode squeezed state with Var X = e^{-2r}/2 and <X> = x0.
struct SingleModeParams {
    double r = 0.0;
    double x0 = 0.0;

    double sigma_x() const { return std::exp(-2.0 * r) / 2.0; }
};

/// Closed-form construction of the displaced two-mode squeezed vacuum.
/// Only mode A is displaced; displace mode B separately if a symmetric
/// displacement is wanted.
GaussianState prepare_epr(const EprParams &params);

/// Same state built from its optical circuit: momentum-squeezed vacuum (r1)
/// and position-squeezed vacuum (r2) mixed on a balanced beamsplitter,
/// followed by the X displacement on mode A. Agrees elementwise with
/// prepare_epr.
GaussianState prepare_epr_circuit(const EprParams &params);

GaussianState prepare_single(const SingleModeParams &params);

/// w^T cov w for a weight vector of length 2n.
double quad_variance(const GaussianState &state, const Eigen::VectorXd &w);
/// w^T mean.
double quad_mean(const GaussianState &state, const Eigen::VectorXd &w);

} // namespace cvsqueeze
