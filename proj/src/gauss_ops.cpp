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

#include "cvsqueeze/gauss_ops.hpp"

#include <stdexcept>

#include "cvsqueeze/errors.hpp"

namespace cvsqueeze {

namespace {

constexpr double kSymplecticTol = 1e-10;

void check_mode(int n_modes, int mode, const char *what) {
    if (mode < 0 || mode >= n_modes) {
        throw std::invalid_argument(std::string(what) + ": mode index out of range");
    }
}

// Symmetrize the product S cov S^T; rounding can leave ~1e-16 asymmetry
// which would otherwise accumulate across long gate sequences.
Eigen::MatrixXd sandwich(const Eigen::MatrixXd &S, const Eigen::MatrixXd &cov) {
    Eigen::MatrixXd out = S * cov * S.transpose();
    return ((out + out.transpose()) / 2.0).eval();
}

} // namespace

Eigen::MatrixXd symplectic_form(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("symplectic_form: need at least one mode");
    }
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (int m = 0; m < n_modes; ++m) {
        omega(2 * m, 2 * m + 1) = 1.0;
        omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
}

SymplecticOp SymplecticOp::identity(int n_modes) {
    return {Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes),
            Eigen::VectorXd::Zero(2 * n_modes)};
}

double SymplecticOp::symplectic_defect() const {
    const Eigen::MatrixXd omega = symplectic_form(n_modes());
    return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff();
}

bool SymplecticOp::is_symplectic(double tol) const {
    return symplectic_defect() <= tol;
}

GaussianState SymplecticOp::apply(const GaussianState &state) const {
    if (state.n_modes() != n_modes()) {
        throw std::invalid_argument("SymplecticOp::apply: mode count mismatch");
    }
    if (!is_symplectic(kSymplecticTol)) {
        throw NumericalError("SymplecticOp::apply: matrix is not symplectic");
    }
    return GaussianState(S * state.mean() + d, sandwich(S, state.cov()));
}

SymplecticOp SymplecticOp::then(const SymplecticOp &next) const {
    if (next.n_modes() != n_modes()) {
        throw std::invalid_argument("SymplecticOp::then: mode count mismatch");
    }
    return {next.S * S, next.S * d + next.d};
}

SymplecticOp squeeze_op(int n_modes, int mode, double r) {
    check_mode(n_modes, mode, "squeeze");
    SymplecticOp op = SymplecticOp::identity(n_modes);
    op.S(2 * mode, 2 * mode) = std::exp(-r);
    op.S(2 * mode + 1, 2 * mode + 1) = std::exp(r);
    return op;
}

SymplecticOp phase_rotation_op(int n_modes, int mode, double theta) {
    check_mode(n_modes, mode, "phase_rotate");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    SymplecticOp op = SymplecticOp::identity(n_modes);
    op.S(2 * mode, 2 * mode) = c;
    op.S(2 * mode, 2 * mode + 1) = s;
    op.S(2 * mode + 1, 2 * mode) = -s;
    op.S(2 * mode + 1, 2 * mode + 1) = c;
    return op;
}

SymplecticOp beamsplit_op(int n_modes, int i, int j, double theta) {
    check_mode(n_modes, i, "beamsplit");
    check_mode(n_modes, j, "beamsplit");
    if (i == j) {
        throw std::invalid_argument("beamsplit: the two modes must differ");
    }
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    SymplecticOp op = SymplecticOp::identity(n_modes);
    for (int q = 0; q < 2; ++q) { // same rotation on x and p sectors
        op.S(2 * i + q, 2 * i + q) = c;
        op.S(2 * i + q, 2 * j + q) = s;
        op.S(2 * j + q, 2 * i + q) = s;
        op.S(2 * j + q, 2 * j + q) = -c;
    }
    return op;
}

SymplecticOp sum_gate_op(int n_modes, int source, int target) {
    check_mode(n_modes, source, "sum_gate");
    check_mode(n_modes, target, "sum_gate");
    if (source == target) {
        throw std::invalid_argument("sum_gate: source and target must differ");
    }
    SymplecticOp op = SymplecticOp::identity(n_modes);
    op.S(2 * target, 2 * source) = -1.0;    // X_T -> X_T - X_S
    op.S(2 * source + 1, 2 * target + 1) = 1.0; // P_S -> P_S + P_T
    return op;
}

SymplecticOp displace_op(int n_modes, int mode, double dx, double dp) {
    check_mode(n_modes, mode, "displace");
    SymplecticOp op = SymplecticOp::identity(n_modes);
    op.d(2 * mode) = dx;
    op.d(2 * mode + 1) = dp;
    return op;
}

GaussianState vacuum(int n_modes) {
    if (n_modes < 1) {
        throw std::invalid_argument("vacuum: mode count must be >= 1");
    }
    return GaussianState(Eigen::VectorXd::Zero(2 * n_modes),
                         kVacuumVariance * Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

GaussianState displace(const GaussianState &state, int mode, double dx, double dp) {
    return displace_op(state.n_modes(), mode, dx, dp).apply(state);
}

GaussianState squeeze(const GaussianState &state, int mode, double r) {
    return squeeze_op(state.n_modes(), mode, r).apply(state);
}

GaussianState phase_rotate(const GaussianState &state, int mode, double theta) {
    return phase_rotation_op(state.n_modes(), mode, theta).apply(state);
}

GaussianState beamsplit(const GaussianState &state, int i, int j, double theta) {
    return beamsplit_op(state.n_modes(), i, j, theta).apply(state);
}

GaussianState sum_gate(const GaussianState &state, int source, int target) {
    return sum_gate_op(state.n_modes(), source, target).apply(state);
}

GaussianState prepare_epr(const EprParams &params) {
    const double sp = params.sigma_plus();
    const double sm = params.sigma_minus();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    mean(0) = params.x0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
    const double vx = (sp + sm) / 4.0;
    const double cx = (sp - sm) / 4.0;
    const double vp = (1.0 / sp + 1.0 / sm) / 4.0;
    const double cp = (1.0 / sp - 1.0 / sm) / 4.0;
    cov(0, 0) = vx;
    cov(2, 2) = vx;
    cov(0, 2) = cx;
    cov(2, 0) = cx;
    cov(1, 1) = vp;
    cov(3, 3) = vp;
    cov(1, 3) = cp;
    cov(3, 1) = cp;
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState prepare_epr_circuit(const EprParams &params) {
    // Mode 0 momentum-squeezed by r1, mode 1 position-squeezed by r2,
    // mixed on a balanced beamsplitter, then X_A displaced by x0.
    GaussianState state = vacuum(2);
    state = squeeze(state, 0, -params.r1);
    state = squeeze(state, 1, params.r2);
    state = beamsplit(state, 0, 1, M_PI / 4.0);
    return displace(state, 0, params.x0, 0.0);
}

GaussianState prepare_single(const SingleModeParams &params) {
    Eigen::VectorXd mean(2);
    mean << params.x0, 0.0;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    cov(0, 0) = params.sigma_x();
    cov(1, 1) = std::exp(2.0 * params.r) / 2.0;
    return GaussianState(std::move(mean), std::move(cov));
}

double quad_variance(const GaussianState &state, const Eigen::VectorXd &w) {
    if (w.size() != state.mean().size()) {
        throw std::invalid_argument("quad_variance: weight vector length must be 2*n_modes");
    }
    return w.dot(state.cov() * w);
}

double quad_mean(const GaussianState &state, const Eigen::VectorXd &w) {
    if (w.size() != state.mean().size()) {
        throw std::invalid_argument("quad_mean: weight vector length must be 2*n_modes");
    }
    return w.dot(state.mean());
}

} // namespace cvsqueeze
