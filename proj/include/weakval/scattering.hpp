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

// Time observables in one-dimensional and s-wave scattering. Units: hbar = 1,
// unit mass, energy E = k^2 / 2.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "weakval/error.hpp"
#include "weakval/improper_dist.hpp"
#include "weakval/numeric.hpp"

namespace weakval {

/// V(x) = omega delta(x).
struct DeltaBarrier {
    double omega = 0.0;
};

/// V(x) = omega on [0, width].
struct RectangularBarrier {
    double omega = 0.0;
    double width = 1.0;
};

/// V(r) = omega for r < radius; s-wave only.
struct RadialSquare {
    double omega = 0.0;
    double radius = 1.0;
};

using ScatterModel = std::variant<DeltaBarrier, RectangularBarrier, RadialSquare>;

inline void validate(const ScatterModel &m) {
    std::visit(
        [](const auto &x) {
            using T = std::decay_t<decltype(x)>;
            detail::require(std::isfinite(x.omega), "potential strength must be finite");
            if constexpr (std::is_same_v<T, RectangularBarrier>) {
                detail::require(x.width > 0.0, "barrier width must be positive");
            } else if constexpr (std::is_same_v<T, RadialSquare>) {
                detail::require(x.radius > 0.0, "radius must be positive");
            }
        },
        m);
}

namespace detail {

/// sin(s a) / s, entire in s^2.
inline cplx sinc_scaled(cplx s, double a) {
    const cplx z = s * a;
    if (std::abs(z) < 1e-4) {
        return a * (1.0 - z * z / 6.0 + z * z * z * z / 120.0);
    }
    return std::sin(z) / s;
}

inline cplx delta_transmission(double omega, double k) { return k / cplx(k, omega); }

inline cplx rectangular_transmission(double v, double a, double k) {
    if (v == 0.0) {
        return 1.0;
    }
    if (k == 0.0) {
        return 0.0;
    }
    const cplx q = std::sqrt(cplx(k * k - 2.0 * v, 0.0));
    const cplx d = std::cos(q * a) - I * (k * k + q * q) / (2.0 * k) * sinc_scaled(q, a);
    return std::polar(1.0, -k * a) / d;
}

/// e^{-2ikR} (1 + i k t) / (1 - i k t), t = tan(s R) / s, s^2 = k^2 - 2 omega.
inline cplx radial_s_matrix(double omega, double radius, double k) {
    const cplx s = std::sqrt(cplx(k * k - 2.0 * omega, 0.0));
    const cplx phase = std::polar(1.0, -2.0 * k * radius);
    if (std::abs((s * radius).imag()) > 20.0) {
        const cplx t = std::tan(s * radius) / s;
        return phase * (1.0 + I * k * t) / (1.0 - I * k * t);
    }
    const cplx c = std::cos(s * radius);
    const cplx sn = sinc_scaled(s, radius);
    return phase * (c + I * k * sn) / (c - I * k * sn);
}

/// cos(sqrt(u) R) and sin(sqrt(u) R)/sqrt(u) as jets in u.
inline std::pair<numeric::Jet2, numeric::Jet2> radial_basis_jets(const numeric::Jet2 &u,
                                                                 double r) {
    const cplx x = u.v;
    cplx c, c1, c2, s, s1, s2;
    if (std::abs(x) * r * r < 4.0) {
        // power series; terms fall off like (|u| R^2)^n / (2n)!
        c = c1 = c2 = s = s1 = s2 = 0.0;
        double fact_even = 1.0;  // (2n)!
        double fact_odd = 1.0;   // (2n+1)!
        cplx upow = 1.0;         // u^n
        double r2n = 1.0;        // R^{2n}
        for (int n = 0; n < 40; ++n) {
            if (n > 0) {
                fact_even *= (2.0 * n - 1.0) * (2.0 * n);
                fact_odd *= (2.0 * n) * (2.0 * n + 1.0);
                r2n *= r * r;
            }
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const double ce = sign * r2n / fact_even;
            const double so = sign * r2n * r / fact_odd;
            c += ce * upow;
            s += so * upow;
            upow *= x;
        }
        // derivatives from the differentiated series
        cplx up = 1.0;
        r2n = 1.0;
        fact_even = 1.0;
        fact_odd = 1.0;
        for (int n = 1; n < 40; ++n) {
            fact_even *= (2.0 * n - 1.0) * (2.0 * n);
            fact_odd *= (2.0 * n) * (2.0 * n + 1.0);
            r2n *= r * r;
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            // up == u^{n-1}
            c1 += sign * n * r2n / fact_even * up;
            s1 += sign * n * r2n * r / fact_odd * up;
            up *= x;
        }
        up = 1.0;
        r2n = r * r;
        fact_even = 2.0;
        fact_odd = 6.0;
        for (int n = 2; n < 40; ++n) {
            fact_even *= (2.0 * n - 1.0) * (2.0 * n);
            fact_odd *= (2.0 * n) * (2.0 * n + 1.0);
            r2n *= r * r;
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            // up == u^{n-2}
            c2 += sign * n * (n - 1.0) * r2n / fact_even * up;
            s2 += sign * n * (n - 1.0) * r2n * r / fact_odd * up;
            up *= x;
        }
    } else {
        const cplx sq = std::sqrt(x);
        c = std::cos(sq * r);
        s = std::sin(sq * r) / sq;
        c1 = -0.5 * r * s;
        s1 = (r * c - s) / (2.0 * x);
        c2 = -0.5 * r * s1;
        s2 = (r * c1 - 3.0 * s1) / (2.0 * x);
    }
    return {numeric::chain(u, c, c1, c2), numeric::chain(u, s, s1, s2)};
}

} // namespace detail

/// T(k) for the barriers, S(k) = exp(2 i delta_0) for the radial well/barrier.
[[nodiscard]] inline cplx transmission(const ScatterModel &model, double k) {
    validate(model);
    detail::require(std::isfinite(k) && k > 0.0, "transmission: k must be positive");
    return std::visit(
        [k](const auto &m) -> cplx {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DeltaBarrier>) {
                return detail::delta_transmission(m.omega, k);
            } else if constexpr (std::is_same_v<T, RectangularBarrier>) {
                return detail::rectangular_transmission(m.omega, m.width, k);
            } else {
                return detail::radial_s_matrix(m.omega, m.radius, k);
            }
        },
        model);
}

/// Reflection amplitude of the delta barrier, -i omega / (k + i omega).
[[nodiscard]] inline cplx delta_reflection(double omega, double k) {
    detail::require(k > 0.0, "reflection: k must be positive");
    return cplx(0.0, -omega) / cplx(k, omega);
}

/// s-wave phase shift delta_0, continuous in k for fixed omega.
[[nodiscard]] inline double s_wave_phase_shift(const RadialSquare &m, double k) {
    detail::require(k > 0.0, "phase shift: k must be positive");
    // 0.5 arg S is defined mod pi; follow the branch continuously from k -> 0
    const int steps = 256;
    double prev = 0.5 * std::arg(detail::radial_s_matrix(m.omega, m.radius, k / steps));
    double acc = prev;
    for (int i = 2; i <= steps; ++i) {
        const double cur = 0.5 * std::arg(detail::radial_s_matrix(m.omega, m.radius, k * i / steps));
        double d = cur - prev;
        d -= pi * std::round(d / pi);
        acc += d;
        prev = cur;
    }
    return acc;
}

/// Approximate opaque-barrier transmission exp(-kappa a - i p a), kappa = sqrt(2V - p^2).
[[nodiscard]] inline cplx opaque_barrier_transmission(const RectangularBarrier &b, double p) {
    detail::require(p > 0.0 && 2.0 * b.omega > p * p,
                    "opaque approximation needs 0 < p^2/2 < V");
    const double kappa = std::sqrt(2.0 * b.omega - p * p);
    return std::exp(cplx(-kappa * b.width, -p * b.width));
}

/**
 * dphi/dE = p^-1 dphi/dp of a transmission function, by central differences
 * with one Richardson step on phase increments arg(T(p + h) / T(p)).
 */
[[nodiscard]] inline double phase_time(const std::function<cplx(double)> &t, double p) {
    detail::require(p > 0.0, "phase_time: p must be positive");
    const cplx t0 = t(p);
    if (!(std::abs(t0) > 1e-280)) {
        throw PreconditionError("phase_time: transmission amplitude vanishes, phase undefined");
    }
    const double h = 1e-3 * p;
    auto phase = [&](double q) { return std::arg(t(q) / t0); };
    auto central = [&](double s) { return (phase(p + s) - phase(p - s)) / (2.0 * s); };
    const double d = (4.0 * central(0.5 * h) - central(h)) / 3.0;
    return d / p;
}

[[nodiscard]] inline double phase_time(const ScatterModel &model, double p) {
    return phase_time([&](double k) { return transmission(model, k); }, p);
}

/// Phase time of the opaque approximation; equals -a/p.
[[nodiscard]] inline double opaque_phase_time(const RectangularBarrier &b, double p) {
    return phase_time([&](double k) { return opaque_barrier_transmission(b, k); }, p);
}

struct DelayGridOptions {
    std::size_t points = std::size_t{1} << 19;
    double x_step = 0.0;  ///< 0: chosen from the model's length scales
    double residual_tolerance = 1e-6;
};

/**
 * Time-delay amplitude Phi_p(x) = (2 pi)^-1 e^{-ipx} int T(k) e^{ikx} dk.
 *
 * T(k) -> 1 at large |k|, which is the spike delta(x). The next three
 * orders of the 1/k expansion are matched by poles at k = p - i gamma,
 * whose transforms are closed-form and live on x < 0; the O(k^-4)
 * remainder is transformed on a k-grid centred at p.
 */
[[nodiscard]] inline HybridDistribution delay_amplitude(const ScatterModel &model, double p,
                                                        const DelayGridOptions &opt = {}) {
    validate(model);
    detail::require(p > 0.0, "delay_amplitude: p must be positive");
    detail::require(numeric::is_power_of_two(opt.points) && opt.points >= 64,
                    "delay grid size must be a power of two >= 64");
    std::function<cplx(double)> tk;
    cplx c1, c2, c3;
    double scale = 1.0 / p;
    if (const auto *d = std::get_if<DeltaBarrier>(&model)) {
        const double w = d->omega;
        tk = [w](double k) { return detail::delta_transmission(w, k); };
        c1 = cplx(0.0, -w);
        c2 = -w * w;
        c3 = cplx(0.0, w * w * w);
        scale = 1.0 / std::max(p, std::abs(w));
    } else if (const auto *r = std::get_if<RectangularBarrier>(&model)) {
        const double v = r->omega;
        const double a = r->width;
        tk = [v, a](double k) { return detail::rectangular_transmission(v, a, k); };
        c1 = cplx(0.0, -v * a);
        c2 = -0.5 * v * v * a * a;
        c3 = cplx(0.0, -0.5 * v * v * a + v * v * v * a * a * a / 6.0);
        scale = std::min(a, 1.0 / std::max(p, std::sqrt(2.0 * std::abs(v))));
    } else {
        throw InvalidArgument("delay_amplitude needs a one-dimensional barrier model");
    }
    const double gamma = p;
    const cplx k0(p, -gamma);
    const cplx d1 = c1;
    const cplx d2 = c2 - k0 * d1;
    const cplx d3 = c3 - k0 * k0 * d1 - 2.0 * k0 * d2;
    auto tail = [&](double k) {
        const cplx z = 1.0 / (k - k0);
        return d1 * z + d2 * z * z + d3 * z * z * z;
    };

    const double dx = opt.x_step > 0.0 ? opt.x_step : scale / 512.0;
    const std::size_t n = opt.points;
    const double dk = 2.0 * pi / (static_cast<double>(n) * dx);
    std::vector<cplx> y(n);
    double peak = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double kappa = (static_cast<double>(j) - static_cast<double>(n / 2)) * dk;
        const double k = p + kappa;
        y[j] = tk(k) - 1.0 - tail(k);
        peak = std::max(peak, std::abs(y[j]));
    }
    const double edge = std::max(std::abs(y.front()), std::abs(y.back()));
    if (edge > opt.residual_tolerance * std::max(peak, 1e-300)) {
        throw PreconditionError("delay_amplitude: k-grid too narrow, residual " +
                                std::to_string(edge / std::max(peak, 1e-300)) +
                                " of peak at the edges");
    }
    auto res = numeric::centred_dft(y, dk, 0.0, +1);
    std::vector<cplx> phi(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double x = (static_cast<double>(m) - static_cast<double>(n / 2)) * dx;
        cplx v = res[m] * dk / (2.0 * pi);
        if (x < 0.0) {
            // (2 pi)^-1 int e^{i(k-p)x} (k - k0)^-n dk = -i (ix)^{n-1} e^{gamma x} / (n-1)!
            const cplx ix(0.0, x);
            v += cplx(0.0, -1.0) * std::exp(gamma * x) * (d1 + d2 * ix + d3 * ix * ix / 2.0);
        } else if (x == 0.0) {
            // the pole terms jump at x = 0; take the midpoint
            v += 0.5 * cplx(0.0, -1.0) * d1;
        }
        phi[m] = v;
    }
    const double start = -static_cast<double>(n / 2) * dx;
    return HybridDistribution(start, dx, std::move(phi), {{0.0, cplx(1.0)}});
}

struct WavepacketOptions {
    double sigma_k = 0.0;          ///< momentum spread of |A(k)|^2; required
    std::size_t points = std::size_t{1} << 14;
    double clear_tolerance = 1e-6;
};

struct WavepacketDelay {
    double centroid_delay = 0.0;      ///< (<x>_ref - <x>_T) / p
    double naive_delay = 0.0;         ///< (x0 + p t - <x>_T) / p
    double transmission_probability = 0.0;
    double time = 0.0;
    double start = 0.0;               ///< initial packet centre x0
};

/**
 * Transmit a Gaussian packet through a barrier and locate the centroid of
 * the transmitted part at a time when it has cleared the barrier. The
 * reference packet propagates freely with amplitude |T(k)| A(k), so the
 * shift measures the phase of T alone.
 */
[[nodiscard]] inline WavepacketDelay wavepacket_delay(const ScatterModel &model, double p,
                                                      const WavepacketOptions &opt) {
    validate(model);
    detail::require(p > 0.0 && opt.sigma_k > 0.0, "wavepacket: p and sigma_k must be positive");
    detail::require(numeric::is_power_of_two(opt.points), "wavepacket grid must be a power of two");
    double right_edge = 0.0;
    if (const auto *r = std::get_if<RectangularBarrier>(&model)) {
        right_edge = r->width;
    } else if (std::holds_alternative<RadialSquare>(model)) {
        throw InvalidArgument("wavepacket_delay needs a one-dimensional barrier model");
    }
    const double sk = opt.sigma_k;
    const double sx = 1.0 / (2.0 * sk);
    const std::size_t n = opt.points;
    WavepacketDelay out;
    out.start = -10.0 * sx;

    // a wide packet spreads while it moves; wait until the slow tail has passed
    double t = (20.0 * sx + right_edge) / p;
    for (int attempt = 0; attempt < 24; ++attempt, t *= 2.0) {
        const double spread = std::sqrt(1.0 + std::pow(t / (2.0 * sx * sx), 2));
        const double x_centre = out.start + p * t;
        // the x-window must cover the packet and reach back past the barrier
        const double range = std::max(64.0 * sx * spread, 3.0 * (x_centre - right_edge));
        const double dk = 2.0 * pi / range;
        const double dx = range / static_cast<double>(n);
        if (dx > sx * spread / 8.0) {
            throw PreconditionError("wavepacket grid too small to resolve the packet");
        }
        std::vector<cplx> at(n);
        std::vector<cplx> ar(n);
        double ptrans = 0.0;
        double pall = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double k = p + (static_cast<double>(j) - static_cast<double>(n / 2)) * dk;
            if (k <= 0.0) {
                continue;
            }
            const double a = std::exp(-(k - p) * (k - p) / (4.0 * sk * sk));
            if (a < 1e-300) {
                continue;
            }
            const cplx tr = transmission(model, k);
            // packet initially centred at `start`, free phase e^{-i k^2 t / 2};
            // the x-grid origin is moved to x_centre
            const cplx prop = std::polar(a, -k * out.start - 0.5 * k * k * t + k * x_centre);
            at[j] = tr * prop;
            ar[j] = std::abs(tr) * prop;
            ptrans += std::norm(tr) * a * a;
            pall += a * a;
        }
        auto centroid = [&](const std::vector<cplx> &amp, double &leak) {
            auto psi = numeric::centred_dft(amp, dk, p, +1);
            double m0 = 0.0;
            double m1 = 0.0;
            double left = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                const double x =
                    x_centre + (static_cast<double>(m) - static_cast<double>(n / 2)) * dx;
                const double w = std::norm(psi[m]);
                m0 += w;
                m1 += w * x;
                if (x < right_edge) {
                    left += w;
                }
            }
            leak = left / m0;
            return m1 / m0;
        };
        double leak_t = 0.0;
        double leak_r = 0.0;
        const double xt = centroid(at, leak_t);
        const double xr = centroid(ar, leak_r);
        if (leak_t > opt.clear_tolerance) {
            continue;
        }
        out.time = t;
        out.transmission_probability = ptrans / pall;
        out.centroid_delay = (xr - xt) / p;
        out.naive_delay = (x_centre - xt) / p;
        return out;
    }
    throw PreconditionError("wavepacket has not cleared the barrier region");
}

/**
 * Exact second-order jet of S(k, omega + lambda) in lambda at lambda = 0.
 */
[[nodiscard]] inline numeric::Jet2 radial_s_matrix_jet(const RadialSquare &m, double k) {
    detail::require(k > 0.0, "k must be positive");
    const numeric::Jet2 u{cplx(k * k - 2.0 * m.omega), cplx(-2.0), cplx(0.0)};
    auto [c, sn] = detail::radial_basis_jets(u, m.radius);
    const cplx phase = std::polar(1.0, -2.0 * k * m.radius);
    const numeric::Jet2 ik_sn = cplx(0.0, k) * sn;
    return phase * ((c + ik_sn) / (c - ik_sn));
}

/// Traversal-time weak values: order 1 gives i S'/S, order 2 gives -S''/S.
[[nodiscard]] inline cplx traversal_weak_value(const RadialSquare &m, double k, int order) {
    detail::require(order == 1 || order == 2, "traversal_weak_value: order must be 1 or 2");
    const auto j = radial_s_matrix_jet(m, k);
    return order == 1 ? I * j.d1 / j.v : -j.d2 / j.v;
}

struct TauGrid {
    double centre = 0.0;
    double step = 0.0;
    std::size_t points = 4096;
};

/**
 * Traversal-time amplitude Phi(tau) = (2 pi)^-1 int e^{i tau lambda}
 * S(omega + lambda)/S(omega) dlambda, smeared by a Gaussian of standard
 * deviation `smear`; normalised, int Phi = 1.
 */
[[nodiscard]] inline HybridDistribution
traversal_amplitude(const std::function<cplx(double)> &s_ratio, const TauGrid &grid, double smear) {
    detail::require(smear > 0.0, "traversal smear must be positive");
    detail::require(grid.step > 0.0 && numeric::is_power_of_two(grid.points) && grid.points >= 64,
                    "tau grid needs a positive step and a power-of-two size");
    // the lambda window starts at half the Nyquist range; the Gaussian must be gone by then
    const double lambda_half = 0.5 * pi / grid.step;
    if (smear * lambda_half < 6.0) {
        throw InvalidArgument("tau grid too coarse for the smearing width (Nyquist): need step <= " +
                              std::to_string(smear * pi / 12.0));
    }
    const double lmax = pi / grid.step;
    const double dl = 2.0 * lmax / static_cast<double>(grid.points);
    std::vector<cplx> y(grid.points);
    for (std::size_t j = 0; j < grid.points; ++j) {
        const double l = (static_cast<double>(j) - static_cast<double>(grid.points / 2)) * dl;
        const double g = std::exp(-0.5 * smear * smear * l * l);
        y[j] = g < 1e-300 ? cplx{} : g * s_ratio(l) * std::polar(1.0, grid.centre * l);
    }
    auto phi = numeric::centred_dft(y, dl, 0.0, +1);
    for (auto &v : phi) {
        v *= dl / (2.0 * pi);
    }
    const double start = grid.centre - static_cast<double>(grid.points / 2) * grid.step;
    return HybridDistribution(start, grid.step, std::move(phi));
}

[[nodiscard]] inline HybridDistribution traversal_amplitude(const RadialSquare &m, double k,
                                                            const TauGrid &grid, double smear) {
    detail::require(k > 0.0, "k must be positive");
    const cplx s0 = detail::radial_s_matrix(m.omega, m.radius, k);
    return traversal_amplitude(
        [&](double l) { return detail::radial_s_matrix(m.omega + l, m.radius, k) / s0; }, grid,
        smear);
}

struct SpinClock {
    double j = 100.0;      ///< spin magnitude, integer or half-integer, >= 1
    double omega = 1e-3;   ///< Larmor frequency

    void validate() const {
        detail::require(j >= 1.0 && std::abs(2.0 * j - std::round(2.0 * j)) < 1e-12,
                        "spin j must be an integer or half-integer >= 1");
        detail::require(omega > 0.0, "Larmor frequency must be positive");
    }
};

struct LarmorReading {
    double jy = 0.0;       ///< <j_y>
    double jy2 = 0.0;      ///< <j_y^2>
    double t_bar = 0.0;    ///< <j_y> / (omega j)
    double t2_bar = 0.0;   ///< (<j_y^2> - j/2) / (omega j)^2
    double final_norm = 0.0;
};

/**
 * A large spin polarised along x precesses about z while the particle is in
 * the region: final amplitudes <m|M_F> = F(m omega) <m|M_I>, with
 * <m|M_I> ~ exp(-m^2 / 2j) and F the clock's characteristic function.
 */
[[nodiscard]] inline LarmorReading larmor_clock(const std::function<cplx(double)> &s_ratio,
                                                const SpinClock &clock) {
    clock.validate();
    const double j = clock.j;
    const auto levels = static_cast<std::size_t>(std::llround(2.0 * j)) + 1;
    std::vector<cplx> a(levels);
    double ni = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
        const double m = -j + static_cast<double>(i);
        const double w = std::exp(-m * m / (2.0 * j));
        a[i] = w;
        ni += w * w;
    }
    double nf = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
        const double m = -j + static_cast<double>(i);
        a[i] /= std::sqrt(ni);
        if (std::abs(a[i]) > 1e-300) {
            a[i] *= s_ratio(m * clock.omega);
        }
        nf += std::norm(a[i]);
    }
    if (!(nf > 1e-300) || !std::isfinite(nf)) {
        throw PreconditionError("larmor_clock: final spin state cannot be normalised");
    }
    LarmorReading r;
    r.final_norm = std::sqrt(nf);
    // <m+1| j_y |m> = -(i/2) sqrt((j - m)(j + m + 1))
    auto up = [&](std::size_t i) {
        const double m = -j + static_cast<double>(i);
        return cplx(0.0, -0.5) * std::sqrt((j - m) * (j + m + 1.0));
    };
    std::vector<cplx> b(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        if (i > 0) {
            b[i] += up(i - 1) * a[i - 1];
        }
        if (i + 1 < levels) {
            b[i] += std::conj(up(i)) * a[i + 1];
        }
    }
    cplx jy = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
        jy += std::conj(a[i]) * b[i];
        r.jy2 += std::norm(b[i]);
    }
    r.jy = jy.real() / nf;
    r.jy2 /= nf;
    r.t_bar = r.jy / (clock.omega * j);
    r.t2_bar = (r.jy2 - 0.5 * j) / (clock.omega * clock.omega * j * j);
    return r;
}

[[nodiscard]] inline LarmorReading larmor_clock(const RadialSquare &m, double k,
                                                const SpinClock &clock) {
    detail::require(k > 0.0, "k must be positive");
    const cplx s0 = detail::radial_s_matrix(m.omega, m.radius, k);
    return larmor_clock(
        [&](double l) { return detail::radial_s_matrix(m.omega + l, m.radius, k) / s0; }, clock);
}

} // namespace weakval
