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

#include "cvsqueeze/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fftw3.h>

#include "cvsqueeze/errors.hpp"

namespace cvsqueeze {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr std::size_t kMaxGridCells = std::size_t{1} << 22;
constexpr double kNormTolerance = 1e-3;

/// Trapezoid endpoint weight.
double tw(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

void require_same_axis(const Axis &a, const Axis &b, const char *what) {
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": inputs must share one axis");
    }
}

void require_cells(std::size_t na, std::size_t nb, const char *what) {
    if (na * nb > kMaxGridCells) {
        throw std::invalid_argument(std::string(what) + ": grid exceeds the memory cap");
    }
}

/// Bivariate normal density with explicit 2x2 covariance entries.
struct BivariateGaussian {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double inv_aa = 0.0;
    double inv_ab = 0.0;
    double inv_bb = 0.0;
    double scale = 0.0;

    BivariateGaussian(double ma, double mb, double saa, double sab, double sbb)
        : mean_a(ma), mean_b(mb) {
        const double det = saa * sbb - sab * sab;
        if (!(det > 0.0) || !(saa > 0.0)) {
            throw NumericalError("bivariate density: covariance block is not positive definite");
        }
        inv_aa = sbb / det;
        inv_ab = -sab / det;
        inv_bb = saa / det;
        scale = 1.0 / (kTwoPi * std::sqrt(det));
    }

    double operator()(double a, double b) const {
        const double da = a - mean_a;
        const double db = b - mean_b;
        const double q = da * da * inv_aa + 2.0 * da * db * inv_ab + db * db * inv_bb;
        return scale * std::exp(-0.5 * q);
    }
};

} // namespace

Axis Axis::centered(double center, double half_width, int n) {
    Axis axis{center - half_width, center + half_width, n};
    axis.validate();
    return axis;
}

void Axis::validate() const {
    if (n < 2) {
        throw std::invalid_argument("axis: need at least two points");
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw std::invalid_argument("axis: bounds must be finite with lo < hi");
    }
}

double Grid1D::norm() const {
    const double h = axis.step();
    double s = 0.0;
    for (int i = 0; i < axis.n; ++i) {
        s += tw(i, axis.n) * values[static_cast<std::size_t>(i)];
    }
    return s * h;
}

void Grid1D::normalize() {
    const double s = norm();
    if (!(s > 0.0)) {
        throw NumericalError("grid normalize: nonpositive norm");
    }
    for (double &v : values) {
        v /= s;
    }
}

double Grid1D::value_at(double x) const {
    if (x < axis.lo || x > axis.hi) {
        return 0.0;
    }
    const double t = (x - axis.lo) / axis.step();
    const int i = std::min(static_cast<int>(t), axis.n - 2);
    const double f = t - i;
    return values[static_cast<std::size_t>(i)] * (1.0 - f) +
           values[static_cast<std::size_t>(i) + 1] * f;
}

Moments1 Grid1D::moments() const {
    const double h = axis.step();
    Moments1 m;
    double first = 0.0;
    for (int i = 0; i < axis.n; ++i) {
        const double w = tw(i, axis.n) * values[static_cast<std::size_t>(i)] * h;
        m.norm += w;
        first += w * axis.at(i);
    }
    if (std::abs(m.norm - 1.0) > kNormTolerance) {
        throw NumericalError("grid moments: norm deviates from 1 beyond 1e-3, distribution "
                             "leaked outside the grid");
    }
    m.mean = first / m.norm;
    double second = 0.0;
    for (int i = 0; i < axis.n; ++i) {
        const double d = axis.at(i) - m.mean;
        second += tw(i, axis.n) * values[static_cast<std::size_t>(i)] * d * d * h;
    }
    m.variance = second / m.norm;
    return m;
}

double Grid2D::norm() const {
    const double ha = ax_a.step();
    const double hb = ax_b.step();
    double s = 0.0;
    for (int ia = 0; ia < ax_a.n; ++ia) {
        double row = 0.0;
        for (int ib = 0; ib < ax_b.n; ++ib) {
            row += tw(ib, ax_b.n) * at(ia, ib);
        }
        s += tw(ia, ax_a.n) * row;
    }
    return s * ha * hb;
}

void Grid2D::normalize() {
    const double s = norm();
    if (!(s > 0.0)) {
        throw NumericalError("grid normalize: nonpositive norm");
    }
    for (double &v : values) {
        v /= s;
    }
}

Grid1D Grid2D::marginal_a() const {
    const double hb = ax_b.step();
    Grid1D out{ax_a, std::vector<double>(static_cast<std::size_t>(ax_a.n), 0.0)};
    for (int ia = 0; ia < ax_a.n; ++ia) {
        double s = 0.0;
        for (int ib = 0; ib < ax_b.n; ++ib) {
            s += tw(ib, ax_b.n) * at(ia, ib);
        }
        out.values[static_cast<std::size_t>(ia)] = s * hb;
    }
    return out;
}

Grid1D Grid2D::marginal_b() const {
    const double ha = ax_a.step();
    Grid1D out{ax_b, std::vector<double>(static_cast<std::size_t>(ax_b.n), 0.0)};
    for (int ib = 0; ib < ax_b.n; ++ib) {
        double s = 0.0;
        for (int ia = 0; ia < ax_a.n; ++ia) {
            s += tw(ia, ax_a.n) * at(ia, ib);
        }
        out.values[static_cast<std::size_t>(ib)] = s * ha;
    }
    return out;
}

Moments2 Grid2D::moments() const {
    const double ha = ax_a.step();
    const double hb = ax_b.step();
    Moments2 m;
    double first_a = 0.0;
    double first_b = 0.0;
    for (int ia = 0; ia < ax_a.n; ++ia) {
        for (int ib = 0; ib < ax_b.n; ++ib) {
            const double w = tw(ia, ax_a.n) * tw(ib, ax_b.n) * at(ia, ib) * ha * hb;
            m.norm += w;
            first_a += w * ax_a.at(ia);
            first_b += w * ax_b.at(ib);
        }
    }
    if (std::abs(m.norm - 1.0) > kNormTolerance) {
        throw NumericalError("grid moments: norm deviates from 1 beyond 1e-3, distribution "
                             "leaked outside the grid");
    }
    m.mean_a = first_a / m.norm;
    m.mean_b = first_b / m.norm;
    for (int ia = 0; ia < ax_a.n; ++ia) {
        const double da = ax_a.at(ia) - m.mean_a;
        for (int ib = 0; ib < ax_b.n; ++ib) {
            const double db = ax_b.at(ib) - m.mean_b;
            const double w = tw(ia, ax_a.n) * tw(ib, ax_b.n) * at(ia, ib) * ha * hb;
            m.var_a += w * da * da;
            m.var_b += w * db * db;
            m.cov_ab += w * da * db;
        }
    }
    m.var_a /= m.norm;
    m.var_b /= m.norm;
    m.cov_ab /= m.norm;
    return m;
}

double gaussian_pdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) {
        throw std::invalid_argument("gaussian_pdf: variance must be positive");
    }
    const double d = x - mean;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(kTwoPi * variance);
}

Axis default_axis(const GaussianState &state, int mode, Quadrature quad, int n, double n_sigmas) {
    const double sd = std::sqrt(state.var_of(mode, quad));
    return Axis::centered(state.mean_of(mode, quad), n_sigmas * sd, n);
}

namespace {

// Truncating a Gaussian inside mean +- 6 sd leaves mass above 2e-9, enough to
// corrupt the third digit of grid moments, so such axes are rejected outright.
void require_coverage(const Axis &axis, double mean, double variance, const char *where) {
    const double margin = 6.0 * std::sqrt(variance) * (1.0 - 1e-12);
    if (axis.lo > mean - margin || axis.hi < mean + margin) {
        throw std::invalid_argument(std::string(where) +
                                    ": axis narrower than 6 standard deviations");
    }
}

}  // namespace

Axis cover_axis(const GaussianState &a, const GaussianState &b, int mode, Quadrature quad, int n,
                double n_sigmas) {
    const Axis axis_a = default_axis(a, mode, quad, n, n_sigmas);
    const Axis axis_b = default_axis(b, mode, quad, n, n_sigmas);
    Axis axis{std::min(axis_a.lo, axis_b.lo), std::max(axis_a.hi, axis_b.hi), n};
    axis.validate();
    return axis;
}

Grid1D rasterize_marginal(const GaussianState &state, int mode, Quadrature quad,
                          const Axis &axis) {
    axis.validate();
    const double mean = state.mean_of(mode, quad);
    const double var = state.var_of(mode, quad);
    require_coverage(axis, mean, var, "rasterize_marginal");
    Grid1D grid{axis, std::vector<double>(static_cast<std::size_t>(axis.n))};
    for (int i = 0; i < axis.n; ++i) {
        grid.values[static_cast<std::size_t>(i)] = gaussian_pdf(axis.at(i), mean, var);
    }
    return grid;
}

Grid2D rasterize_joint(const GaussianState &state, int mode_a, int mode_b, Quadrature quad,
                       const Axis &ax_a, const Axis &ax_b) {
    ax_a.validate();
    ax_b.validate();
    if (mode_a == mode_b) {
        throw std::invalid_argument("rasterize_joint: modes must differ");
    }
    require_cells(static_cast<std::size_t>(ax_a.n), static_cast<std::size_t>(ax_b.n),
                  "rasterize_joint");
    const int qa = quad_index(mode_a, quad);
    const int qb = quad_index(mode_b, quad);
    require_coverage(ax_a, state.mean()(qa), state.cov()(qa, qa), "rasterize_joint");
    require_coverage(ax_b, state.mean()(qb), state.cov()(qb, qb), "rasterize_joint");
    const BivariateGaussian pdf(state.mean()(qa), state.mean()(qb), state.cov()(qa, qa),
                                state.cov()(qa, qb), state.cov()(qb, qb));
    Grid2D grid{ax_a, ax_b,
                std::vector<double>(static_cast<std::size_t>(ax_a.n) * ax_b.n)};
    for (int ia = 0; ia < ax_a.n; ++ia) {
        const double a = ax_a.at(ia);
        for (int ib = 0; ib < ax_b.n; ++ib) {
            grid.at(ia, ib) = pdf(a, ax_b.at(ib));
        }
    }
    return grid;
}

Grid2D rasterize_wigner(const GaussianState &state, int mode, const Axis &ax_x,
                        const Axis &ax_p) {
    ax_x.validate();
    ax_p.validate();
    require_cells(static_cast<std::size_t>(ax_x.n), static_cast<std::size_t>(ax_p.n),
                  "rasterize_wigner");
    const int qx = quad_index(mode, Quadrature::X);
    const int qp = quad_index(mode, Quadrature::P);
    require_coverage(ax_x, state.mean()(qx), state.cov()(qx, qx), "rasterize_wigner");
    require_coverage(ax_p, state.mean()(qp), state.cov()(qp, qp), "rasterize_wigner");
    const BivariateGaussian pdf(state.mean()(qx), state.mean()(qp), state.cov()(qx, qx),
                                state.cov()(qx, qp), state.cov()(qp, qp));
    Grid2D grid{ax_x, ax_p,
                std::vector<double>(static_cast<std::size_t>(ax_x.n) * ax_p.n)};
    for (int ix = 0; ix < ax_x.n; ++ix) {
        const double x = ax_x.at(ix);
        for (int ip = 0; ip < ax_p.n; ++ip) {
            grid.at(ix, ip) = pdf(x, ax_p.at(ip));
        }
    }
    return grid;
}

std::vector<double> convolve_direct(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("convolve: empty input");
    }
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = a[i];
        if (v == 0.0) {
            continue;
        }
        double *dst = out.data() + i;
        for (std::size_t j = 0; j < b.size(); ++j) {
            dst[j] += v * b[j];
        }
    }
    return out;
}

std::vector<double> convolve_fft(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("convolve: empty input");
    }
    const std::size_t m = a.size() + b.size() - 1;
    std::vector<double> pa(m, 0.0);
    std::vector<double> pb(m, 0.0);
    std::copy(a.begin(), a.end(), pa.begin());
    std::copy(b.begin(), b.end(), pb.begin());
    const std::size_t nc = m / 2 + 1;
    fftw_complex *fa = fftw_alloc_complex(nc);
    fftw_complex *fb = fftw_alloc_complex(nc);
    std::vector<double> out(m, 0.0);
    fftw_plan plan_a = fftw_plan_dft_r2c_1d(static_cast<int>(m), pa.data(), fa, FFTW_ESTIMATE);
    fftw_plan plan_b = fftw_plan_dft_r2c_1d(static_cast<int>(m), pb.data(), fb, FFTW_ESTIMATE);
    fftw_execute(plan_a);
    fftw_execute(plan_b);
    for (std::size_t i = 0; i < nc; ++i) {
        const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
        const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
        fa[i][0] = re;
        fa[i][1] = im;
    }
    fftw_plan plan_inv =
        fftw_plan_dft_c2r_1d(static_cast<int>(m), fa, out.data(), FFTW_ESTIMATE);
    fftw_execute(plan_inv);
    const double scale = 1.0 / static_cast<double>(m);
    for (double &v : out) {
        v *= scale;
    }
    fftw_destroy_plan(plan_inv);
    fftw_destroy_plan(plan_b);
    fftw_destroy_plan(plan_a);
    fftw_free(fb);
    fftw_free(fa);
    return out;
}

Grid1D sum_density(const Grid1D &a, const Grid1D &b, bool use_fft) {
    const double ha = a.axis.step();
    if (std::abs(ha - b.axis.step()) > 1e-12 * ha) {
        throw std::invalid_argument("sum_density: inputs must share the grid step");
    }
    std::vector<double> wa(a.values);
    for (int i = 0; i < a.axis.n; ++i) {
        wa[static_cast<std::size_t>(i)] *= tw(i, a.axis.n);
    }
    std::vector<double> conv = use_fft ? convolve_fft(wa, b.values) : convolve_direct(wa, b.values);
    Grid1D out{Axis{a.axis.lo + b.axis.lo, a.axis.hi + b.axis.hi,
                    a.axis.n + b.axis.n - 1},
               std::move(conv)};
    for (double &v : out.values) {
        v *= ha;
    }
    return out;
}

Grid1D halved_sum_density(const Grid1D &a, const Grid1D &b) {
    require_same_axis(a.axis, b.axis, "halved_sum_density");
    const int n = a.axis.n;
    const double h = a.axis.step();
    Grid1D out{a.axis, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    // Every target point 2 x_i - u_k is itself a grid node, so no
    // interpolation enters and the quadrature converges like the
    // trapezoid rule on a smooth rapidly decaying integrand.
    for (int i = 0; i < n; ++i) {
        const int k0 = std::max(0, 2 * i - (n - 1));
        const int k1 = std::min(n - 1, 2 * i);
        double acc = 0.0;
        for (int k = k0; k <= k1; ++k) {
            acc += tw(k, n) * a.values[static_cast<std::size_t>(k)] *
                   b.values[static_cast<std::size_t>(2 * i - k)];
        }
        out.values[static_cast<std::size_t>(i)] = 2.0 * h * acc;
    }
    return out;
}

Grid1D halved_sum_density_on(const Grid1D &a, const Grid1D &b, const Axis &out_axis) {
    out_axis.validate();
    const int n = a.axis.n;
    const double h = a.axis.step();
    Grid1D out{out_axis, std::vector<double>(static_cast<std::size_t>(out_axis.n), 0.0)};
    for (int j = 0; j < out_axis.n; ++j) {
        const double x2 = 2.0 * out_axis.at(j);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += tw(k, n) * a.values[static_cast<std::size_t>(k)] * b.value_at(x2 - a.axis.at(k));
        }
        out.values[static_cast<std::size_t>(j)] = 2.0 * h * acc;
    }
    return out;
}

Grid2D halved_sum_density_2d(const Grid2D &a, const Grid2D &b) {
    require_same_axis(a.ax_a, b.ax_a, "halved_sum_density_2d");
    require_same_axis(a.ax_b, b.ax_b, "halved_sum_density_2d");
    const int na = a.ax_a.n;
    const int nb = a.ax_b.n;
    const double scale = 4.0 * a.ax_a.step() * a.ax_b.step();
    std::vector<double> wa(a.values);
    for (int k = 0; k < na; ++k) {
        for (int l = 0; l < nb; ++l) {
            wa[static_cast<std::size_t>(k) * nb + l] *= tw(k, na) * tw(l, nb);
        }
    }
    // Rows of b reversed so that the inner sum walks both factors forward.
    std::vector<double> brev(a.values.size());
    for (int m = 0; m < na; ++m) {
        for (int j = 0; j < nb; ++j) {
            brev[static_cast<std::size_t>(m) * nb + j] = b.at(m, nb - 1 - j);
        }
    }
    Grid2D out{a.ax_a, a.ax_b, std::vector<double>(a.values.size(), 0.0)};
    for (int ia = 0; ia < na; ++ia) {
        const int k0 = std::max(0, 2 * ia - (na - 1));
        const int k1 = std::min(na - 1, 2 * ia);
        for (int ib = 0; ib < nb; ++ib) {
            const int off = nb - 1 - 2 * ib;
            const int l0 = std::max(0, 2 * ib - (nb - 1));
            const int l1 = std::min(nb - 1, 2 * ib);
            double acc = 0.0;
            for (int k = k0; k <= k1; ++k) {
                const double *wrow = wa.data() + static_cast<std::size_t>(k) * nb;
                const double *brow = brev.data() + static_cast<std::size_t>(2 * ia - k) * nb;
                double dot = 0.0;
                for (int l = l0; l <= l1; ++l) {
                    dot += wrow[l] * brow[l + off];
                }
                acc += dot;
            }
            out.at(ia, ib) = scale * acc;
        }
    }
    return out;
}

Grid2D sum_density_2d(const Grid2D &a, const Grid2D &b, bool use_fft) {
    const double ha = a.ax_a.step();
    const double hb = a.ax_b.step();
    if (std::abs(ha - b.ax_a.step()) > 1e-12 * ha ||
        std::abs(hb - b.ax_b.step()) > 1e-12 * hb) {
        throw std::invalid_argument("sum_density_2d: inputs must share grid steps");
    }
    const int na = a.ax_a.n;
    const int nb = a.ax_b.n;
    const int ma = na + b.ax_a.n - 1;
    const int mb = nb + b.ax_b.n - 1;
    require_cells(static_cast<std::size_t>(ma), static_cast<std::size_t>(mb), "sum_density_2d");
    Grid2D out{Axis{a.ax_a.lo + b.ax_a.lo, a.ax_a.hi + b.ax_a.hi, ma},
               Axis{a.ax_b.lo + b.ax_b.lo, a.ax_b.hi + b.ax_b.hi, mb},
               std::vector<double>(static_cast<std::size_t>(ma) * mb, 0.0)};

    std::vector<double> wa(a.values);
    for (int k = 0; k < na; ++k) {
        for (int l = 0; l < nb; ++l) {
            wa[static_cast<std::size_t>(k) * nb + l] *= tw(k, na) * tw(l, nb);
        }
    }

    if (use_fft) {
        const std::size_t cells = static_cast<std::size_t>(ma) * mb;
        const std::size_t nc = static_cast<std::size_t>(ma) * (mb / 2 + 1);
        std::vector<double> pa(cells, 0.0);
        std::vector<double> pb(cells, 0.0);
        for (int k = 0; k < na; ++k) {
            std::copy(wa.begin() + static_cast<std::ptrdiff_t>(k) * nb,
                      wa.begin() + static_cast<std::ptrdiff_t>(k) * nb + nb,
                      pa.begin() + static_cast<std::ptrdiff_t>(k) * mb);
        }
        for (int k = 0; k < b.ax_a.n; ++k) {
            std::copy(b.values.begin() + static_cast<std::ptrdiff_t>(k) * b.ax_b.n,
                      b.values.begin() + static_cast<std::ptrdiff_t>(k) * b.ax_b.n + b.ax_b.n,
                      pb.begin() + static_cast<std::ptrdiff_t>(k) * mb);
        }
        fftw_complex *fa = fftw_alloc_complex(nc);
        fftw_complex *fb = fftw_alloc_complex(nc);
        fftw_plan plan_a = fftw_plan_dft_r2c_2d(ma, mb, pa.data(), fa, FFTW_ESTIMATE);
        fftw_plan plan_b = fftw_plan_dft_r2c_2d(ma, mb, pb.data(), fb, FFTW_ESTIMATE);
        fftw_execute(plan_a);
        fftw_execute(plan_b);
        for (std::size_t i = 0; i < nc; ++i) {
            const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
            const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
            fa[i][0] = re;
            fa[i][1] = im;
        }
        fftw_plan plan_inv = fftw_plan_dft_c2r_2d(ma, mb, fa, out.values.data(), FFTW_ESTIMATE);
        fftw_execute(plan_inv);
        const double scale = ha * hb / (static_cast<double>(ma) * static_cast<double>(mb));
        for (double &v : out.values) {
            v *= scale;
        }
        fftw_destroy_plan(plan_inv);
        fftw_destroy_plan(plan_b);
        fftw_destroy_plan(plan_a);
        fftw_free(fb);
        fftw_free(fa);
        return out;
    }

    for (int k = 0; k < na; ++k) {
        for (int l = 0; l < nb; ++l) {
            const double v = wa[static_cast<std::size_t>(k) * nb + l];
            if (v == 0.0) {
                continue;
            }
            for (int kb = 0; kb < b.ax_a.n; ++kb) {
                double *dst = out.values.data() + static_cast<std::size_t>(k + kb) * mb + l;
                const double *src = b.values.data() + static_cast<std::size_t>(kb) * b.ax_b.n;
                for (int lb = 0; lb < b.ax_b.n; ++lb) {
                    dst[lb] += v * src[lb];
                }
            }
        }
    }
    for (double &v : out.values) {
        v *= ha * hb;
    }
    return out;
}

void OracleOptions::validate() const {
    if (n < 8 || n > 4097) {
        throw std::invalid_argument("oracle options: points per axis must be in [8, 4097]");
    }
    if (!(n_sigmas >= 6.0) || !(n_sigmas <= 20.0)) {
        throw std::invalid_argument("oracle options: n_sigmas must be in [6, 20]");
    }
}

MarginalsSingle oracle_single(const GaussianState &source, const GaussianState &target,
                              const OracleOptions &options) {
    options.validate();
    if (source.n_modes() != 1 || target.n_modes() != 1) {
        throw std::invalid_argument("oracle_single: copies must be single-mode");
    }
    const Quadrature cq = options.concentrated;
    const Quadrature oq = cq == Quadrature::X ? Quadrature::P : Quadrature::X;
    const Axis ax_c = cover_axis(source, target, 0, cq, options.n, options.n_sigmas);
    const Axis ax_o = cover_axis(source, target, 0, oq, options.n, options.n_sigmas);
    Grid1D concentrated = halved_sum_density(rasterize_marginal(source, 0, cq, ax_c),
                                             rasterize_marginal(target, 0, cq, ax_c));
    Grid1D conjugate = sum_density(rasterize_marginal(source, 0, oq, ax_o),
                                   rasterize_marginal(target, 0, oq, ax_o), options.use_fft);
    if (cq == Quadrature::X) {
        return {std::move(concentrated), std::move(conjugate)};
    }
    return {std::move(conjugate), std::move(concentrated)};
}

MarginalsTwoMode oracle_two_mode(const GaussianState &source, const GaussianState &target,
                                 const OracleOptions &options) {
    options.validate();
    if (options.n > 512) {
        throw std::invalid_argument("oracle_two_mode: grid capped at 512 points per axis");
    }
    if (source.n_modes() != 2 || target.n_modes() != 2) {
        throw std::invalid_argument("oracle_two_mode: copies must be two-mode");
    }
    if (options.concentrated != Quadrature::X) {
        throw std::invalid_argument("oracle_two_mode: only X concentration is supported");
    }
    const Axis ax_xa = cover_axis(source, target, 0, Quadrature::X, options.n, options.n_sigmas);
    const Axis ax_xb = cover_axis(source, target, 1, Quadrature::X, options.n, options.n_sigmas);
    const Axis ax_pa = cover_axis(source, target, 0, Quadrature::P, options.n, options.n_sigmas);
    const Axis ax_pb = cover_axis(source, target, 1, Quadrature::P, options.n, options.n_sigmas);
    MarginalsTwoMode out;
    out.x = halved_sum_density_2d(rasterize_joint(source, 0, 1, Quadrature::X, ax_xa, ax_xb),
                                  rasterize_joint(target, 0, 1, Quadrature::X, ax_xa, ax_xb));
    out.p = sum_density_2d(rasterize_joint(source, 0, 1, Quadrature::P, ax_pa, ax_pb),
                           rasterize_joint(target, 0, 1, Quadrature::P, ax_pa, ax_pb),
                           options.use_fft);
    return out;
}

Grid2D oracle_single_wigner(const GaussianState &source, const GaussianState &target,
                            const OracleOptions &options) {
    options.validate();
    if (options.n > 128) {
        throw std::invalid_argument("oracle_single_wigner: grid capped at 128 points per axis");
    }
    if (source.n_modes() != 1 || target.n_modes() != 1) {
        throw std::invalid_argument("oracle_single_wigner: copies must be single-mode");
    }
    const Axis ax_x = cover_axis(source, target, 0, Quadrature::X, options.n, options.n_sigmas);
    const Axis ax_p = cover_axis(source, target, 0, Quadrature::P, options.n, options.n_sigmas);
    const Grid2D ws = rasterize_wigner(source, 0, ax_x, ax_p);
    const Grid2D wt = rasterize_wigner(target, 0, ax_x, ax_p);
    const int nx = ax_x.n;
    const int np = ax_p.n;

    std::vector<double> weighted(ws.values);
    for (int k = 0; k < nx; ++k) {
        for (int l = 0; l < np; ++l) {
            weighted[static_cast<std::size_t>(k) * np + l] *= tw(k, nx) * tw(l, np);
        }
    }

    const int mp = 2 * np - 1;
    Grid2D out{ax_x, Axis{2.0 * ax_p.lo, 2.0 * ax_p.hi, mp},
               std::vector<double>(static_cast<std::size_t>(nx) * mp, 0.0)};
    for (int ix = 0; ix < nx; ++ix) {
        double *orow = out.values.data() + static_cast<std::size_t>(ix) * mp;
        const int k0 = std::max(0, 2 * ix - (nx - 1));
        const int k1 = std::min(nx - 1, 2 * ix);
        for (int k = k0; k <= k1; ++k) {
            const double *srow = weighted.data() + static_cast<std::size_t>(k) * np;
            const double *trow = wt.values.data() + static_cast<std::size_t>(2 * ix - k) * np;
            for (int l = 0; l < np; ++l) {
                const double v = srow[l];
                if (v == 0.0) {
                    continue;
                }
                double *dst = orow + l;
                for (int j = 0; j < np; ++j) {
                    dst[j] += v * trow[j];
                }
            }
        }
    }
    const double scale = 2.0 * ax_x.step() * ax_p.step();
    for (double &v : out.values) {
        v *= scale;
    }
    return out;
}

double max_abs_difference(const Grid1D &grid, const std::function<double(double)> &f) {
    double worst = 0.0;
    for (int i = 0; i < grid.axis.n; ++i) {
        worst = std::max(worst,
                         std::abs(grid.values[static_cast<std::size_t>(i)] - f(grid.axis.at(i))));
    }
    return worst;
}

double l1_distance(const Grid1D &a, const Grid1D &b) {
    require_same_axis(a.axis, b.axis, "l1_distance");
    const double h = a.axis.step();
    double s = 0.0;
    for (int i = 0; i < a.axis.n; ++i) {
        s += tw(i, a.axis.n) *
             std::abs(a.values[static_cast<std::size_t>(i)] - b.values[static_cast<std::size_t>(i)]);
    }
    return s * h;
}

double OracleComparison::worst() const {
    return std::max(std::max(sup_x, sup_p), std::max(moment_x, moment_p));
}

OracleComparison compare_single(const GaussianState &source, const GaussianState &target,
                                const GaussianState &engine_out, const OracleOptions &options) {
    if (engine_out.n_modes() != 1) {
        throw std::invalid_argument("compare_single: engine output must be single-mode");
    }
    const MarginalsSingle oracle = oracle_single(source, target, options);
    OracleComparison cmp;
    const double mx = engine_out.mean_of(0, Quadrature::X);
    const double vx = engine_out.var_of(0, Quadrature::X);
    const double mp = engine_out.mean_of(0, Quadrature::P);
    const double vp = engine_out.var_of(0, Quadrature::P);
    cmp.sup_x = max_abs_difference(oracle.x, [&](double x) { return gaussian_pdf(x, mx, vx); });
    cmp.sup_p = max_abs_difference(oracle.p, [&](double p) { return gaussian_pdf(p, mp, vp); });
    const Moments1 ox = oracle.x.moments();
    const Moments1 op = oracle.p.moments();
    cmp.moment_x = std::max(std::abs(ox.mean - mx), std::abs(ox.variance - vx));
    cmp.moment_p = std::max(std::abs(op.mean - mp), std::abs(op.variance - vp));
    return cmp;
}

OracleComparison compare_two_mode(const GaussianState &source, const GaussianState &target,
                                  const GaussianState &engine_out, const OracleOptions &options) {
    if (engine_out.n_modes() != 2) {
        throw std::invalid_argument("compare_two_mode: engine output must be two-mode");
    }
    const MarginalsTwoMode oracle = oracle_two_mode(source, target, options);
    OracleComparison cmp;
    auto sup_vs_engine = [&](const Grid1D &grid, int mode, Quadrature quad) {
        const double m = engine_out.mean_of(mode, quad);
        const double v = engine_out.var_of(mode, quad);
        return max_abs_difference(grid, [&](double x) { return gaussian_pdf(x, m, v); });
    };
    cmp.sup_x = std::max(sup_vs_engine(oracle.x.marginal_a(), 0, Quadrature::X),
                         sup_vs_engine(oracle.x.marginal_b(), 1, Quadrature::X));
    cmp.sup_p = std::max(sup_vs_engine(oracle.p.marginal_a(), 0, Quadrature::P),
                         sup_vs_engine(oracle.p.marginal_b(), 1, Quadrature::P));
    const Moments2 ox = oracle.x.moments();
    const Moments2 op = oracle.p.moments();
    auto worst_moment = [&](const Moments2 &m, Quadrature quad) {
        const int qa = quad_index(0, quad);
        const int qb = quad_index(1, quad);
        double w = std::abs(m.mean_a - engine_out.mean()(qa));
        w = std::max(w, std::abs(m.mean_b - engine_out.mean()(qb)));
        w = std::max(w, std::abs(m.var_a - engine_out.cov()(qa, qa)));
        w = std::max(w, std::abs(m.var_b - engine_out.cov()(qb, qb)));
        w = std::max(w, std::abs(m.cov_ab - engine_out.cov()(qa, qb)));
        return w;
    };
    cmp.moment_x = worst_moment(ox, Quadrature::X);
    cmp.moment_p = worst_moment(op, Quadrature::P);
    return cmp;
}

} // namespace cvsqueeze
