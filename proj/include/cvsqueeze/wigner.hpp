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

// Brute-force verification route. Everything here works on sampled
// quadrature distributions and numerical integrals; it never touches the
// covariance-update engine, so agreement between the two is meaningful.

#pragma once

#include <functional>
#include <vector>

#include "cvsqueeze/gaussian_state.hpp"

namespace cvsqueeze {

/// Uniform grid of n points from lo to hi inclusive.
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int n = 0;

    double step() const { return (hi - lo) / (n - 1); }
    double at(int i) const { return lo + step() * i; }
    static Axis centered(double center, double half_width, int n);
    void validate() const;
    bool operator==(const Axis &other) const = default;
};

struct Moments1 {
    double norm = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct Grid1D {
    Axis axis;
    std::vector<double> values;

    /// Trapezoid integral of the current values.
    double norm() const;
    void normalize();
    /// Linear interpolation; zero outside the axis range.
    double value_at(double x) const;
    /// Throws NumericalError when the norm drifts past 1e-3, which means
    /// the distribution leaked outside the grid.
    Moments1 moments() const;
};

struct Moments2 {
    double norm = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    double cov_ab = 0.0;
};

/// Row-major: values[ia * ax_b.n + ib].
struct Grid2D {
    Axis ax_a;
    Axis ax_b;
    std::vector<double> values;

    double at(int ia, int ib) const { return values[static_cast<std::size_t>(ia) * ax_b.n + ib]; }
    double &at(int ia, int ib) { return values[static_cast<std::size_t>(ia) * ax_b.n + ib]; }
    double norm() const;
    void normalize();
    Grid1D marginal_a() const;
    Grid1D marginal_b() const;
    Moments2 moments() const;
};

double gaussian_pdf(double x, double mean, double variance);

/// Axis centered on the mode's marginal mean, half-width n_sigmas standard
/// deviations. Wide enough that truncation error is far below the grid
/// comparison tolerances.
Axis default_axis(const GaussianState &state, int mode, Quadrature quad, int n,
                  double n_sigmas = 6.0);

/// Smallest axis covering the default axes of both states.
Axis cover_axis(const GaussianState &a, const GaussianState &b, int mode, Quadrature quad, int n,
                double n_sigmas = 6.0);

/// Exact marginal density sampled on the axis.
Grid1D rasterize_marginal(const GaussianState &state, int mode, Quadrature quad, const Axis &axis);

/// Joint density of the same quadrature on two modes.
Grid2D rasterize_joint(const GaussianState &state, int mode_a, int mode_b, Quadrature quad,
                       const Axis &ax_a, const Axis &ax_b);

/// Phase-space quasidensity of a single mode; Gaussian states make it an
/// ordinary bivariate normal.
Grid2D rasterize_wigner(const GaussianState &state, int mode, const Axis &ax_x, const Axis &ax_p);

std::vector<double> convolve_direct(const std::vector<double> &a, const std::vector<double> &b);
/// Same contract as convolve_direct, via FFTW. Bitwise results differ at
/// rounding level only.
std::vector<double> convolve_fft(const std::vector<double> &a, const std::vector<double> &b);

/// Density of the sum of two independent variables. Axes must share the
/// step; the result spans [a.lo + b.lo, a.hi + b.hi].
Grid1D sum_density(const Grid1D &a, const Grid1D &b, bool use_fft = true);

/// Density of (A + B) / 2 on the axis of `a`; both inputs must share one
/// axis, and every evaluation then lands exactly on grid nodes.
Grid1D halved_sum_density(const Grid1D &a, const Grid1D &b);

/// Same quantity on an arbitrary output axis, interpolating `b` linearly.
/// Second-order accurate in the input step.
Grid1D halved_sum_density_on(const Grid1D &a, const Grid1D &b, const Axis &out_axis);

/// Joint density of ((A1 + B1) / 2, (A2 + B2) / 2) for two independent
/// bivariate inputs on identical axes.
Grid2D halved_sum_density_2d(const Grid2D &a, const Grid2D &b);

/// Joint density of (A1 + B1, A2 + B2).
Grid2D sum_density_2d(const Grid2D &a, const Grid2D &b, bool use_fft = true);

struct OracleOptions {
    /// Points per axis. Two-dimensional routes cap this at 512 and the
    /// full phase-space route at 128; pick smaller grids there.
    int n = 1024;
    double n_sigmas = 8.0;
    bool use_fft = true;
    /// Which quadrature the protocol concentrates.
    Quadrature concentrated = Quadrature::X;

    void validate() const;
};

struct MarginalsSingle {
    Grid1D x;
    Grid1D p;
};

/// Output marginals of the two-copy protocol computed purely from input
/// densities: the concentrated quadrature becomes the halved sum and the
/// conjugate one the plain sum.
MarginalsSingle oracle_single(const GaussianState &source, const GaussianState &target,
                              const OracleOptions &options);

struct MarginalsTwoMode {
    Grid2D x;
    Grid2D p;
};

/// Same for two-mode copies: joint X density through the halved sum in
/// both arguments, joint P density through the plain sum.
MarginalsTwoMode oracle_two_mode(const GaussianState &source, const GaussianState &target,
                                 const OracleOptions &options);

/// Full phase-space route for single-mode copies: the product Wigner
/// function pushed through ((x_s + x_t) / 2, p_s + p_t). Exact for
/// Gaussian inputs. Grid is capped at 128 points per axis.
Grid2D oracle_single_wigner(const GaussianState &source, const GaussianState &target,
                            const OracleOptions &options);

/// Largest pointwise deviation between grid values and f at the nodes.
double max_abs_difference(const Grid1D &grid, const std::function<double(double)> &f);

/// Trapezoid integral of |a - b|. Axes must match.
double l1_distance(const Grid1D &a, const Grid1D &b);

struct OracleComparison {
    /// Sup-norm distance between oracle densities and engine densities.
    double sup_x = 0.0;
    double sup_p = 0.0;
    /// Worst absolute error of mean/variance/covariance entries.
    double moment_x = 0.0;
    double moment_p = 0.0;

    double worst() const;
};

/// Runs the oracle on two copies and compares against an engine-produced
/// output state.
OracleComparison compare_single(const GaussianState &source, const GaussianState &target,
                                const GaussianState &engine_out, const OracleOptions &options);

OracleComparison compare_two_mode(const GaussianState &source, const GaussianState &target,
                                  const GaussianState &engine_out, const OracleOptions &options);

} // namespace cvsqueeze
