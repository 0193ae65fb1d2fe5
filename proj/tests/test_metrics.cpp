// Copyright 2026 The cvsqueeze Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "cvsqueeze/gauss_ops.hpp"
#include "cvsqueeze/gaussian_state.hpp"
#include "cvsqueeze/metrics.hpp"
#include "cvsqueeze/rng.hpp"
#include "test_helpers.hpp"

using namespace cvsqueeze;
using cvsqueeze::testing::random_state;

namespace {

constexpr double kE = 2.718281828459045;
constexpr double kInvE = 0.36787944117144233;
constexpr double kESquared = 7.38905609893065;
constexpr double kPuritySpot = 0.42509603494228043;       // r1=1, r2=0.5
constexpr double kLognegSpot = 1.4426950408889634;        // r1=r2=0.5
constexpr double kInvCoshOne = 0.64805427366388546;       // 1/cosh(1)
constexpr double kThermalEntropy = 0.95477125244221916;   // nu = 1

GaussianState thermal_two_mode() {
    return GaussianState(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4));
}

}  // namespace

TEST_CASE("collective x variances recover the preparation parameters") {
    const auto [sp, sm] = sigma_pm(prepare_epr({1.0, 0.5, 0.3}));
    CHECK_ABS(sp, kESquared, 1e-12);
    CHECK_ABS(sm, kInvE, 1e-14);

    const auto [vp, vm] = sigma_pm(vacuum(2));
    CHECK(vp == 1.0);
    CHECK(vm == 1.0);

    for (const double r1 : {0.0, 0.3, 1.0}) {
        for (const double r2 : {0.0, 0.3, 1.0}) {
            const auto [a, b] = sigma_pm(prepare_epr({r1, r2, 0.0}));
            CHECK_ABS(a, std::exp(2.0 * r1), 1e-12);
            CHECK_ABS(b, std::exp(-2.0 * r2), 1e-12);
        }
    }

    CHECK_THROWS_AS(sigma_pm(vacuum(1)), std::invalid_argument);
}

TEST_CASE("marginal purity agrees with its closed form") {
    for (const double r1 : {0.0, 0.3, 1.0}) {
        for (const double r2 : {0.0, 0.3, 1.0}) {
            const EprParams params{r1, r2, 0.6};
            const GaussianState s = prepare_epr(params);
            const double closed = epr_marginal_purity(params.sigma_plus(), params.sigma_minus());
            CHECK_ABS(marginal_purity(s, 0), closed, 1e-10);
            CHECK_ABS(marginal_purity(s, 1), closed, 1e-10);
        }
    }

    CHECK_ABS(marginal_purity(prepare_epr({1.0, 0.5, 0.0}), 0), kPuritySpot, 1e-12);
    CHECK_ABS(marginal_purity(prepare_epr({0.5, 0.5, 0.0}), 0), kInvCoshOne, 1e-12);
    CHECK(marginal_purity(vacuum(2), 0) == 1.0);
    CHECK_THROWS_AS(marginal_purity(vacuum(1), 0), std::invalid_argument);
    CHECK_THROWS_AS(epr_marginal_purity(-1.0, 0.5), std::invalid_argument);
}

TEST_CASE("global purity distinguishes pure from thermal states") {
    CHECK(global_purity(vacuum(1)) == 1.0);
    CHECK_ABS(global_purity(prepare_epr({0.7, 0.2, 1.0})), 1.0, 1e-12);
    CHECK_ABS(global_purity(thermal_two_mode()), 0.25, 1e-14);
    const GaussianState one_hot(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    CHECK_ABS(global_purity(one_hot), 0.5, 1e-14);
}

TEST_CASE("symplectic eigenvalues fall out of block diagonal cases") {
    const auto vac = symplectic_eigenvalues(vacuum(2).cov());
    REQUIRE(vac.size() == 2);
    CHECK_ABS(vac[0], 0.5, 1e-12);
    CHECK_ABS(vac[1], 0.5, 1e-12);

    const auto pure = symplectic_eigenvalues(prepare_epr({0.5, 0.5, 0.0}).cov());
    CHECK_ABS(pure[0], 0.5, 1e-12);
    CHECK_ABS(pure[1], 0.5, 1e-12);

    // Thermal mode (nu = 1) next to vacuum (nu = 1/2), sorted ascending.
    const GaussianState mixed =
        tensor(GaussianState(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)),
               vacuum(1));
    const auto nus = symplectic_eigenvalues(mixed.cov());
    REQUIRE(nus.size() == 2);
    CHECK_ABS(nus[0], 0.5, 1e-12);
    CHECK_ABS(nus[1], 1.0, 1e-12);

    Eigen::MatrixXd asym(2, 2);
    asym << 0.5, 0.3, -0.3, 0.5;
    CHECK_THROWS_AS(symplectic_eigenvalues(asym), std::invalid_argument);
    CHECK_THROWS_AS(symplectic_eigenvalues(Eigen::MatrixXd::Identity(3, 3)),
                    std::invalid_argument);
}

TEST_CASE("physical states sit above the vacuum floor") {
    RngStream rng(71, "floor");
    for (int trial = 0; trial < 10; ++trial) {
        const GaussianState s = random_state(rng, 2);
        for (const double nu : symplectic_eigenvalues(s.cov())) {
            CHECK(nu >= 0.5 - 1e-10);
        }
    }
}

TEST_CASE("log negativity measures epr entanglement") {
    CHECK(log_negativity(vacuum(2)) == 0.0);
    CHECK_ABS(log_negativity(prepare_epr({0.5, 0.5, 0.0})), kLognegSpot, 1e-12);
    for (const double r : {0.1, 0.3, 1.0}) {
        CHECK_ABS(log_negativity(prepare_epr({r, r, 0.7})), 2.0 * r / std::log(2.0), 1e-10);
    }
    // A product of local squeezers is separable.
    const GaussianState product = tensor(prepare_single({0.8, 0.0}), prepare_single({0.8, 0.0}));
    CHECK(log_negativity(product) == 0.0);
    CHECK_THROWS_AS(log_negativity(vacuum(1)), std::invalid_argument);
}

TEST_CASE("log negativity is invariant under local symplectics") {
    RngStream rng(83, "local");
    const GaussianState s = prepare_epr({0.6, 0.4, 0.0});
    const double before = log_negativity(s);
    for (int trial = 0; trial < 10; ++trial) {
        GaussianState t = s;
        for (int mode = 0; mode < 2; ++mode) {
            t = squeeze(t, mode, rng.uniform(-0.8, 0.8));
            t = phase_rotate(t, mode, rng.uniform(0.0, 6.28));
            t = displace(t, mode, rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
        }
        CHECK_ABS(log_negativity(t), before, 1e-9);
    }
}

TEST_CASE("von neumann entropy vanishes only for pure states") {
    CHECK_ABS(von_neumann_entropy(vacuum(2)), 0.0, 1e-10);
    CHECK_ABS(von_neumann_entropy(prepare_epr({0.9, 0.2, 1.0})), 0.0, 1e-8);
    const GaussianState thermal(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2));
    CHECK_ABS(von_neumann_entropy(thermal), kThermalEntropy, 1e-12);
    CHECK_ABS(von_neumann_entropy(thermal_two_mode()), 2.0 * kThermalEntropy, 1e-12);
}

TEST_CASE("correlation summary mirrors the covariance blocks") {
    RngStream rng(19, "corr");
    for (int trial = 0; trial < 5; ++trial) {
        const GaussianState s = random_state(rng, 2);
        const CorrelationSummary c = correlation_summary(s);
        const Eigen::MatrixXd &cov = s.cov();

        CHECK_ABS(c.v_x(0, 0), cov(0, 0), 1e-14);
        CHECK_ABS(c.v_x(0, 1), cov(0, 2), 1e-14);
        CHECK_ABS(c.v_x(1, 1), cov(2, 2), 1e-14);
        CHECK_ABS(c.v_p(0, 0), cov(1, 1), 1e-14);
        CHECK_ABS(c.v_p(0, 1), cov(1, 3), 1e-14);
        CHECK_ABS(c.v_p(1, 1), cov(3, 3), 1e-14);
        CHECK(c.v_x(0, 1) == c.v_x(1, 0));

        CHECK_ABS(c.sigma_plus, cov(0, 0) + cov(2, 2) + 2.0 * cov(0, 2), 1e-12);
        CHECK_ABS(c.sigma_minus, cov(0, 0) + cov(2, 2) - 2.0 * cov(0, 2), 1e-12);
        CHECK_ABS(c.var_p_sum, cov(1, 1) + cov(3, 3) + 2.0 * cov(1, 3), 1e-12);
        CHECK_ABS(c.var_p_diff, cov(1, 1) + cov(3, 3) - 2.0 * cov(1, 3), 1e-12);

        CHECK(c.means[0].first == s.mean_of(0, Quadrature::X));
        CHECK(c.means[1].second == s.mean_of(1, Quadrature::P));
    }
    CHECK_THROWS_AS(correlation_summary(vacuum(3)), std::invalid_argument);
}

TEST_CASE("epr momentum correlations mirror the position ones") {
    const EprParams params{1.0, 0.5, 0.0};
    const CorrelationSummary c = correlation_summary(prepare_epr(params));
    CHECK_ABS(c.var_p_sum, 1.0 / params.sigma_plus(), 1e-14);
    CHECK_ABS(c.var_p_diff, 1.0 / params.sigma_minus(), 1e-13);
}
