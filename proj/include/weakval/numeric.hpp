// Copyright 2026 The weakval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Small numerical building blocks: centred DFTs, Gauss-Legendre rules,
 * second-order Taylor jets and Richardson-extrapolated differences.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "error.hpp"

namespace weakval {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

namespace numeric {

[[nodiscard]] inline bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

[[nodiscard]] inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) {
        p <<= 1;
    }
    return p;
}

/**
 * Centred discrete Fourier transform.
 *
 * Samples y_j sit at x_j = x_centre + (j - N/2) h for j = 0..N-1. The result
 * holds Y_m = sum_j y_j exp(sign * i * x_j * q_m) at q_m = (m - N/2) dq with
 * dq = 2 pi / (N h). No quadrature weight is applied; callers multiply by h
 * (or dq / 2 pi) themselves.
 */
[[nodiscard]] inline std::vector<cplx>
centred_dft(std::span<const cplx> y, double h, double x_centre, int sign) {
    const std::size_t n = y.size();
    detail::require(n >= 2 && n % 2 == 0, "centred_dft: size must be even");
    detail::require(sign == 1 || sign == -1, "centred_dft: sign must be +-1");
    std::vector<cplx> buf(n);
    for (std::size_t j = 0; j < n; ++j) {
        buf[j] = (j % 2 == 0) ? y[j] : -y[j];
    }
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    if (sign < 0) {
        fft.fwd(out, buf);
    } else {
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        fft.inv(out, buf);
    }
    const double dq = 2.0 * pi / (static_cast<double>(n) * h);
    const cplx global =
        std::polar(1.0, sign * pi * static_cast<double>(n) / 2.0);
    for (std::size_t m = 0; m < n; ++m) {
        const double q =
            (static_cast<double>(m) - static_cast<double>(n / 2)) * dq;
        const double parity = (m % 2 == 0) ? 1.0 : -1.0;
        out[m] *= parity * global * std::polar(1.0, sign * x_centre * q);
    }
    return out;
}

/// Full linear convolution c_k = sum_j a_j b_{k-j}, via a zero-padded FFT.
[[nodiscard]] inline std::vector<cplx> linear_convolution(std::span<const cplx> a,
                                                          std::span<const cplx> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    const std::size_t out_len = a.size() + b.size() - 1;
    if (a.size() * b.size() <= 4096) {
        std::vector<cplx> c(out_len);
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                c[i + j] += a[i] * b[j];
            }
        }
        return c;
    }
    const std::size_t n = next_power_of_two(out_len);
    std::vector<cplx> pa(n);
    std::vector<cplx> pb(n);
    std::copy(a.begin(), a.end(), pa.begin());
    std::copy(b.begin(), b.end(), pb.begin());
    Eigen::FFT<double> fft;
    std::vector<cplx> fa;
    std::vector<cplx> fb;
    fft.fwd(fa, pa);
    fft.fwd(fb, pb);
    for (std::size_t i = 0; i < n; ++i) {
        fa[i] *= fb[i];
    }
    std::vector<cplx> c;
    fft.inv(c, fa);
    c.resize(out_len);
    return c;
}

/// Gauss-Legendre nodes and weights on [a, b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] inline QuadratureRule gauss_legendre(std::size_t n, double a,
                                                   double b) {
    detail::require(n >= 1, "gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const auto dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const auto dk = static_cast<double>(k);
                const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

/// Gauss-Legendre rule of `order` nodes repeated on `panels` equal panels.
[[nodiscard]] inline QuadratureRule composite_gauss_legendre(double a, double b,
                                                             std::size_t panels,
                                                             std::size_t order) {
    detail::require(panels >= 1, "composite_gauss_legendre: need a panel");
    QuadratureRule out;
    const double w = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + static_cast<double>(p) * w;
        auto r = gauss_legendre(order, lo, lo + w);
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

/// Trapezoid rule over uniformly spaced samples.
template <class T>
[[nodiscard]] T trapezoid(std::span<const T> y, double h) {
    if (y.size() < 2) {
        return T{};
    }
    T sum = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        sum += y[i];
    }
    return sum * h;
}

/**
 * Value, first and second derivative of a function of one real variable,
 * propagated exactly through arithmetic (second-order forward mode).
 */
struct Jet2 {
    cplx v{};
    cplx d1{};
    cplx d2{};

    static Jet2 variable(double x) { return {cplx{x, 0.0}, cplx{1.0, 0.0}, {}}; }
    static Jet2 constant(cplx c) { return {c, {}, {}}; }
};

inline Jet2 operator+(const Jet2 &a, const Jet2 &b) {
    return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
inline Jet2 operator-(const Jet2 &a, const Jet2 &b) {
    return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
inline Jet2 operator-(const Jet2 &a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet2 operator*(const Jet2 &a, const Jet2 &b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1,
            a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet2 operator*(cplx c, const Jet2 &a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline Jet2 operator*(const Jet2 &a, cplx c) { return c * a; }
inline Jet2 operator+(const Jet2 &a, cplx c) { return {a.v + c, a.d1, a.d2}; }
inline Jet2 operator+(cplx c, const Jet2 &a) { return a + c; }
inline Jet2 operator-(cplx c, const Jet2 &a) { return {c - a.v, -a.d1, -a.d2}; }
inline Jet2 operator-(const Jet2 &a, cplx c) { return {a.v - c, a.d1, a.d2}; }

/// Apply g with known g, g', g'' at the jet's value.
inline Jet2 chain(const Jet2 &u, cplx g, cplx g1, cplx g2) {
    return {g, g1 * u.d1, g2 * u.d1 * u.d1 + g1 * u.d2};
}

inline Jet2 reciprocal(const Jet2 &a) {
    const cplx r = 1.0 / a.v;
    return chain(a, r, -r * r, 2.0 * r * r * r);
}
inline Jet2 operator/(const Jet2 &a, const Jet2 &b) { return a * reciprocal(b); }

inline Jet2 exp(const Jet2 &a) {
    const cplx e = std::exp(a.v);
    return chain(a, e, e, e);
}

/**
 * Central-difference derivative of order 1 or 2 with one Richardson step
 * (combining steps h and h/2), accurate to O(h^4).
 */
template <class F>
[[nodiscard]] auto richardson_derivative(F &&f, double x, double h, int order) {
    auto central = [&](double step) {
        if (order == 1) {
            return (f(x + step) - f(x - step)) / (2.0 * step);
        }
        return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
    };
    detail::require(order == 1 || order == 2,
                    "richardson_derivative: order must be 1 or 2");
    const auto coarse = central(h);
    const auto fine = central(0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

/// Binomial coefficient as a double (exact for the small n used here).
[[nodiscard]] inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

} // namespace numeric
} // namespace weakval
