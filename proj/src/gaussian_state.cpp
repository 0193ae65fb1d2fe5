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

#include "cvsqueeze/gaussian_state.hpp"

#include <fstream>
#include <stdexcept>

#include "cvsqueeze/errors.hpp"
#include "cvsqueeze/metrics.hpp"

namespace cvsqueeze {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr int kSchemaVersion = 1;
} // namespace

std::string to_string(Quadrature q) {
    return q == Quadrature::X ? "x" : "p";
}

Quadrature quadrature_from_string(const std::string &s) {
    if (s == "X" || s == "x") {
        return Quadrature::X;
    }
    if (s == "P" || s == "p") {
        return Quadrature::P;
    }
    throw std::invalid_argument("unknown quadrature '" + s + "' (expected X or P)");
}

GaussianState::GaussianState() : n_modes_(0), mean_(0), cov_(0, 0) {}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : n_modes_(static_cast<int>(mean.size()) / 2), mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() % 2 != 0) {
        throw std::invalid_argument("GaussianState: mean length must be 2*n_modes");
    }
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
        throw std::invalid_argument("GaussianState: cov must be 2n x 2n");
    }
    if (cov_.size() > 0) {
        const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
        if (asym > kSymmetryTol) {
            throw std::invalid_argument("GaussianState: cov not symmetric (max asymmetry " +
                                        std::to_string(asym) + ")");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov_);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("GaussianState: cov not positive definite");
        }
    }
}

double GaussianState::mean_of(int mode, Quadrature q) const {
    if (mode < 0 || mode >= n_modes_) {
        throw std::invalid_argument("GaussianState: mode index out of range");
    }
    return mean_(quad_index(mode, q));
}

double GaussianState::var_of(int mode, Quadrature q) const {
    if (mode < 0 || mode >= n_modes_) {
        throw std::invalid_argument("GaussianState: mode index out of range");
    }
    const int k = quad_index(mode, q);
    return cov_(k, k);
}

GaussianState GaussianState::reduced(const std::vector<int> &modes) const {
    if (modes.empty()) {
        throw std::invalid_argument("GaussianState::reduced: empty mode selection");
    }
    for (int m : modes) {
        if (m < 0 || m >= n_modes_) {
            throw std::invalid_argument("GaussianState::reduced: mode index out of range");
        }
    }
    const int k = static_cast<int>(modes.size());
    Eigen::VectorXd mean(2 * k);
    Eigen::MatrixXd cov(2 * k, 2 * k);
    for (int a = 0; a < k; ++a) {
        for (int qa = 0; qa < 2; ++qa) {
            mean(2 * a + qa) = mean_(2 * modes[a] + qa);
            for (int b = 0; b < k; ++b) {
                for (int qb = 0; qb < 2; ++qb) {
                    cov(2 * a + qa, 2 * b + qb) = cov_(2 * modes[a] + qa, 2 * modes[b] + qb);
                }
            }
        }
    }
    return GaussianState(std::move(mean), std::move(cov));
}

bool GaussianState::is_physical(double tol) const {
    if (n_modes_ == 0) {
        return true;
    }
    for (double nu : symplectic_eigenvalues(cov_)) {
        if (nu < 0.5 - tol) {
            return false;
        }
    }
    return true;
}

void GaussianState::assert_physical(double tol) const {
    if (!is_physical(tol)) {
        throw NumericalError("GaussianState: covariance violates the uncertainty bound "
                             "(symplectic eigenvalue below 1/2)");
    }
}

bool GaussianState::operator==(const GaussianState &other) const {
    return n_modes_ == other.n_modes_ && mean_ == other.mean_ && cov_ == other.cov_;
}

GaussianState tensor(const GaussianState &a, const GaussianState &b) {
    const int na = 2 * a.n_modes();
    const int nb = 2 * b.n_modes();
    Eigen::VectorXd mean(na + nb);
    mean << a.mean(), b.mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(na + nb, na + nb);
    cov.topLeftCorner(na, na) = a.cov();
    cov.bottomRightCorner(nb, nb) = b.cov();
    return GaussianState(std::move(mean), std::move(cov));
}

double max_state_difference(const GaussianState &a, const GaussianState &b) {
    if (a.n_modes() != b.n_modes()) {
        throw std::invalid_argument("max_state_difference: mode count mismatch");
    }
    if (a.n_modes() == 0) {
        return 0.0;
    }
    const double dm = (a.mean() - b.mean()).cwiseAbs().maxCoeff();
    const double dc = (a.cov() - b.cov()).cwiseAbs().maxCoeff();
    return std::max(dm, dc);
}

void to_json(nlohmann::json &j, const GaussianState &state) {
    const auto n = state.mean().size();
    std::vector<double> mean(state.mean().data(), state.mean().data() + n);
    std::vector<std::vector<double>> cov;
    cov.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        std::vector<double> row(static_cast<std::size_t>(n));
        for (Eigen::Index c = 0; c < n; ++c) {
            row[static_cast<std::size_t>(c)] = state.cov()(r, c);
        }
        cov.push_back(std::move(row));
    }
    j = nlohmann::json{{"schema_version", kSchemaVersion},
                       {"n_modes", state.n_modes()},
                       {"ordering", "xpxp"},
                       {"hbar", 1},
                       {"vacuum_variance", kVacuumVariance},
                       {"mean", mean},
                       {"cov", cov}};
}

void from_json(const nlohmann::json &j, GaussianState &state) {
    const int n_modes = j.at("n_modes").get<int>();
    if (j.at("ordering").get<std::string>() != "xpxp") {
        throw std::invalid_argument("state JSON: unsupported ordering (expected \"xpxp\")");
    }
    if (j.at("hbar").get<double>() != 1.0) {
        throw std::invalid_argument("state JSON: unsupported hbar (expected 1)");
    }
    if (j.at("vacuum_variance").get<double>() != kVacuumVariance) {
        throw std::invalid_argument("state JSON: unsupported vacuum_variance (expected 0.5)");
    }
    const auto mean_vec = j.at("mean").get<std::vector<double>>();
    const auto cov_rows = j.at("cov").get<std::vector<std::vector<double>>>();
    const std::size_t dim = 2 * static_cast<std::size_t>(n_modes);
    if (mean_vec.size() != dim || cov_rows.size() != dim) {
        throw std::invalid_argument("state JSON: mean/cov size does not match n_modes");
    }
    Eigen::VectorXd mean(dim);
    Eigen::MatrixXd cov(dim, dim);
    for (std::size_t r = 0; r < dim; ++r) {
        mean(static_cast<Eigen::Index>(r)) = mean_vec[r];
        if (cov_rows[r].size() != dim) {
            throw std::invalid_argument("state JSON: cov row has wrong length");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cov_rows[r][c];
        }
    }
    state = GaussianState(std::move(mean), std::move(cov));
    state.assert_physical();
}

GaussianState read_state_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open state file: " + path);
    }
    nlohmann::json j;
    in >> j;
    return j.get<GaussianState>();
}

void write_state_file(const std::string &path, const GaussianState &state) {
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("cannot write state file: " + path);
    }
    nlohmann::json j = state;
    out << j.dump(2) << "\n";
}

} // namespace cvsqueeze
