// Copyright 2026 The cvsqueeze Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "cvsqueeze/errors.hpp"
#include "cvsqueeze/gauss_ops.hpp"
#include "cvsqueeze/homodyne.hpp"
#include "cvsqueeze/metrics.hpp"
#include "cvsqueeze/rng.hpp"
#include "test_helpers.hpp"

using namespace cvsqueeze;
using cvsqueeze::testing::random_state;

TEST_CASE("outcome distribution reads the marginal parameters") {
    const auto [m0, v0] = outcome_distribution(vacuum(1), 0, Quadrature::X);
    CHECK(m0 == 0.0);
    CHECK(v0 == 0.5);

    const auto [m1, v1] = outcome_distribution(prepare_single({0.5, 3.0}), 0, Quadrature::X);
    CHECK(m1 == 3.0);
    CHECK_ABS(v1, 0.18393972058572117, 1e-15);

    CHECK_THROWS_AS(outcome_distribution(vacuum(1), 1, Quadrature::X), std::invalid_argument);
}

TEST_CASE("coupled-copy target x marginal forgets the displacement") {
    for (const double r : {0.0, 0.5, 1.0}) {
        for (const double x0 : {0.0, 1.7, -4.0}) {
            const GaussianState copy = prepare_single({r, x0});
            const GaussianState coupled = sum_gate(tensor(copy, copy), 0, 1);
            const auto [mean, var] = outcome_distribution(coupled, 1, Quadrature::X);
            CHECK_ABS(mean, 0.0, 1e-12);
            CHECK_ABS(var, 2.0 * copy.var_of(0, Quadrature::X), 1e-14);
        }
    }
}

TEST_CASE("forced homodyne after the coupling gate matches hand algebra") {
    const GaussianState coupled = sum_gate(vacuum(2), 0, 1);
    for (const double outcome : {-3.5, 0.0, 2.0}) {
        const auto [record, kept] = homodyne(coupled, 1, Quadrature::X, outcome);
        CHECK(record.outcome == outcome);
        CHECK(record.seed_info == "forced");
        CHECK(record.predicted_mean == 0.0);
        CHECK(record.predicted_variance == 1.0);
        CHECK(kept.n_modes() == 1);
        CHECK_ABS(kept.mean_of(0, Quadrature::X), -outcome / 2.0, 1e-14);
        CHECK_ABS(kept.var_of(0, Quadrature::X), 0.25, 1e-14);
        kept.assert_physical(1e-10);
    }
}

TEST_CASE("conditioning matches an explicit schur complement") {
    RngStream rng(31, "schur");
    for (int trial = 0; trial < 10; ++trial) {
        const GaussianState s = random_state(rng, 2);
        const double y = rng.uniform(-4.0, 4.0);
        const auto [record, kept] = homodyne(s, 1, Quadrature::X, y);

        const Eigen::Matrix2d a = s.cov().block(0, 0, 2, 2);
        const Eigen::Vector2d c = s.cov().block(0, 2, 2, 1);
        const double b = s.cov()(2, 2);
        const Eigen::Matrix2d expected_cov = a - c * c.transpose() / b;
        const Eigen::Vector2d expected_mean =
            s.mean().head(2) + c * (y - s.mean()(2)) / b;

        CHECK((kept.cov() - expected_cov).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((kept.mean() - expected_mean).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((void *)&record != nullptr);
    }
}

TEST_CASE("product states are untouched by conditioning") {
    const GaussianState a = prepare_single({0.4, 1.0});
    const GaussianState b = prepare_single({-0.3, -2.0});
    const GaussianState ab = tensor(a, b);
    for (const double outcome : {-7.0, 0.0, 3.2}) {
        const auto [record, kept] = homodyne(ab, 1, Quadrature::X, outcome);
        CHECK(max_state_difference(kept, a) == 0.0);
        CHECK(record.predicted_mean == b.mean_of(0, Quadrature::X));
    }
}

TEST_CASE("conditional covariance ignores the outcome value") {
    const GaussianState s = prepare_epr({0.7, 0.4, 1.3});
    const auto [ra, kept_a] = homodyne(s, 1, Quadrature::X, -3.5);
    const auto [rb, kept_b] = homodyne(s, 1, Quadrature::X, 2.0);
    CHECK((kept_a.cov() - kept_b.cov()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(kept_a.mean() != kept_b.mean());
    CHECK(ra.predicted_variance == rb.predicted_variance);
}

TEST_CASE("conditioning a pure state keeps it pure") {
    for (const double r1 : {0.0, 0.3, 1.0}) {
        const GaussianState s = prepare_epr({r1, 0.5, 0.9});
        const auto [record, kept] = homodyne(s, 1, Quadrature::X, 0.4);
        CHECK_ABS(global_purity(kept), 1.0, 1e-8);
        CHECK(record.predicted_variance > 0.0);
    }
}

TEST_CASE("p quadrature conditioning follows the momentum block") {
    const GaussianState s = prepare_epr({0.6, 0.8, 0.0});
    const auto [record, kept] = homodyne(s, 1, Quadrature::P, 1.1);
    const double var_pa = s.cov()(1, 1);
    const double cov_pp = s.cov()(1, 3);
    const double var_pb = s.cov()(3, 3);
    CHECK_ABS(kept.var_of(0, Quadrature::P), var_pa - cov_pp * cov_pp / var_pb, 1e-14);
    CHECK_ABS(kept.mean_of(0, Quadrature::P), cov_pp * 1.1 / var_pb, 1e-14);
    // x sector of an EPR pair carries no x-p cross terms, so it is untouched.
    CHECK(kept.var_of(0, Quadrature::X) == s.cov()(0, 0));
    CHECK(record.mode == 1);
}

TEST_CASE("measuring the last mode leaves an empty state") {
    const auto [record, kept] = homodyne(prepare_single({0.3, 1.2}), 0, Quadrature::X, 0.7);
    CHECK(kept.n_modes() == 0);
    CHECK(record.outcome == 0.7);
}

TEST_CASE("measuring a middle mode keeps the outer modes in order") {
    const GaussianState a = prepare_single({0.5, 1.0});
    const GaussianState b = prepare_single({0.0, 2.0});
    const GaussianState c = prepare_single({-0.5, 3.0});
    const GaussianState abc = tensor(tensor(a, b), c);
    const auto [record, kept] = homodyne(abc, 1, Quadrature::X, 0.0);
    CHECK(kept.n_modes() == 2);
    CHECK(max_state_difference(kept, tensor(a, c)) == 0.0);
    CHECK(record.predicted_mean == 2.0);
}

TEST_CASE("sampled outcomes are reproducible per seed") {
    const GaussianState s = prepare_epr({0.5, 0.5, 1.0});
    RngStream rng_a(77, "h");
    RngStream rng_b(77, "h");
    const auto [ra, ka] = homodyne(s, 1, Quadrature::X, std::nullopt, rng_a);
    const auto [rb, kb] = homodyne(s, 1, Quadrature::X, std::nullopt, rng_b);
    CHECK(ra.outcome == rb.outcome);
    CHECK(ra.seed_info == "h#77");
    CHECK(max_state_difference(ka, kb) == 0.0);

    RngStream rng_c(78, "h");
    const auto [rc, kc] = homodyne(s, 1, Quadrature::X, std::nullopt, rng_c);
    CHECK(rc.outcome != ra.outcome);
}

TEST_CASE("sampled outcome statistics match the predicted marginal") {
    const GaussianState s = prepare_single({0.3, 1.2});
    const auto [pred_mean, pred_var] = outcome_distribution(s, 0, Quadrature::X);
    RngStream rng(101, "hist");
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto [record, kept] = homodyne(s, 0, Quadrature::X, std::nullopt, rng);
        sum += record.outcome;
        sum_sq += record.outcome * record.outcome;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double mean_se = std::sqrt(pred_var / n);
    const double var_se = pred_var * std::sqrt(2.0 / n);
    CHECK(std::abs(mean - pred_mean) <= 5.0 * mean_se);
    CHECK(std::abs(var - pred_var) <= 5.0 * var_se);
}

TEST_CASE("outcome averaged conditionals rebuild the unconditional marginal") {
    const GaussianState s = prepare_epr({0.5, 0.5, 1.0});
    const GaussianState marginal = s.reduced({0});
    RngStream rng(55, "ensemble");
    const int n = 100000;
    double sum_x = 0.0, sum_xx = 0.0;
    Eigen::Matrix2d cond_cov = Eigen::Matrix2d::Zero();
    for (int i = 0; i < n; ++i) {
        const auto [record, kept] = homodyne(s, 1, Quadrature::X, std::nullopt, rng);
        const double mx = kept.mean_of(0, Quadrature::X);
        sum_x += mx;
        sum_xx += mx * mx;
        if (i == 0) {
            cond_cov = kept.cov();
        }
    }
    const double mean = sum_x / n;
    const double scatter = sum_xx / n - mean * mean;
    // Law of total variance: conditional cov plus the scatter of the
    // conditional means reproduces the marginal.
    const double total_var = cond_cov(0, 0) + scatter;
    const double target_var = marginal.var_of(0, Quadrature::X);
    const double se_mean = std::sqrt(scatter / n);
    const double se_var = target_var * std::sqrt(2.0 / n);
    CHECK(std::abs(mean - marginal.mean_of(0, Quadrature::X)) <= 3.0 * se_mean);
    CHECK(std::abs(total_var - target_var) <= 3.0 * se_var);
}

TEST_CASE("homodyne rejects bad inputs") {
    const GaussianState s = vacuum(2);
    RngStream rng(1, "err");
    CHECK_THROWS_AS(homodyne(s, 2, Quadrature::X, std::nullopt, rng), std::invalid_argument);
    CHECK_THROWS_AS(homodyne(s, -1, Quadrature::X, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(homodyne(s, 0, Quadrature::X, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
    CHECK_THROWS_AS(homodyne(s, 0, Quadrature::X, std::nan("")), std::invalid_argument);
}

TEST_CASE("near deterministic quadratures trip the singularity floor") {
    const GaussianState s = squeeze(vacuum(1), 0, 20.0);
    CHECK(s.var_of(0, Quadrature::X) < 1e-12);
    CHECK_THROWS_AS(homodyne(s, 0, Quadrature::X, 0.0), NumericalError);
    // The conjugate quadrature is huge but perfectly measurable.
    CHECK_NOTHROW(homodyne(s, 0, Quadrature::P, 0.0));
}

TEST_CASE("homodyne records round trip through json") {
    const GaussianState s = prepare_epr({0.5, 0.5, 1.0});
    RngStream rng(9, "trace");
    const auto [record, kept] = homodyne(s, 1, Quadrature::P, std::nullopt, rng);
    const nlohmann::json j = record;
    const auto back = j.get<HomodyneRecord>();
    CHECK(back.mode == record.mode);
    CHECK(back.quadrature == record.quadrature);
    CHECK(back.outcome == record.outcome);
    CHECK(back.predicted_mean == record.predicted_mean);
    CHECK(back.predicted_variance == record.predicted_variance);
    CHECK(back.seed_info == record.seed_info);
    CHECK(j["quadrature"] == "p");
}
