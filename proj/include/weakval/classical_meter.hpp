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
 * Classical inaccurate meter: smearing of a reading distribution with the
 * pointer profile, moment recovery, and the Monte-Carlo cost of the
 * low-accuracy limit. Trajectories are those of a free particle.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "apparatus.hpp"
#include "error.hpp"
#include "improper_dist.hpp"
#include "numeric.hpp"

namespace weakval {

/**
 * Convolve `d` with a sampled kernel k(f).
 *
 * The result lives on a uniform grid of step `h` (the smooth grid of `d`
 * when there is one) wide enough to hold every shifted kernel. Smooth parts
 * are convolved through the FFT with trapezoid weights, so total integral,
 * mean and second moment transform exactly in the discrete sense. Each spike
 * becomes a sampled copy of the kernel centred on it; with `unit_mass` each
 * copy is rescaled to carry exactly the spike's weight.
 */
template <class Kernel>
[[nodiscard]] HybridDistribution convolve_with_kernel(const HybridDistribution &d, Kernel &&k,
                                                      double half_width, double h,
                                                      bool unit_mass) {
    if (d.has_smooth()) {
        h = d.grid_step();
    }
    detail::require(h > 0.0 && half_width > 0.0, "convolve: bad kernel geometry");
    const auto K = static_cast<std::ptrdiff_t>(std::ceil(half_width / h));
    std::vector<cplx> kern(static_cast<std::size_t>(2 * K + 1));
    double ksum = 0.0;
    for (std::ptrdiff_t j = -K; j <= K; ++j) {
        const double v = k(static_cast<double>(j) * h);
        kern[static_cast<std::size_t>(j + K)] = v;
        ksum += v;
    }
    if (unit_mass) {
        for (auto &v : kern) {
            v /= ksum * h;
        }
    }
    auto [lo, hi] = d.support_bounds();
    detail::require(std::isfinite(lo), "convolve: empty distribution");
    // anchor the output grid on the smooth grid, or on the lowest spike
    const double anchor = d.has_smooth() ? d.grid_start() : lo;
    const auto below = static_cast<std::ptrdiff_t>(std::ceil((anchor - lo) / h - 1e-9)) + K;
    const double start = anchor - static_cast<double>(below) * h;
    const auto count =
        static_cast<std::size_t>(std::ceil((hi - start) / h - 1e-9)) + static_cast<std::size_t>(K) + 1;
    std::vector<cplx> out(count);

    if (d.has_smooth()) {
        const auto &v = d.values();
        std::vector<cplx> a(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double c = (i == 0 || i + 1 == v.size()) ? 0.5 : 1.0;
            a[i] = c * h * v[i];
        }
        auto c = numeric::linear_convolution(a, kern);
        // c[i] sits at grid_start + (i - K) h
        const std::size_t offset = static_cast<std::size_t>(below - K);
        for (std::size_t i = 0; i < c.size(); ++i) {
            out[offset + i] += c[i];
        }
    }
    for (const auto &s : d.spikes()) {
        const double pos = (s.location - start) / h;
        const auto first = static_cast<std::ptrdiff_t>(std::ceil(pos - static_cast<double>(K)));
        const auto last = static_cast<std::ptrdiff_t>(std::floor(pos + static_cast<double>(K)));
        double local = 0.0;
        for (auto i = first; i <= last; ++i) {
            local += k(start + static_cast<double>(i) * h - s.location);
        }
        const cplx scale = unit_mass ? s.weight / (local * h) : s.weight;
        for (auto i = std::max<std::ptrdiff_t>(first, 0);
             i <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(count) - 1); ++i) {
            out[static_cast<std::size_t>(i)] +=
                scale * k(start + static_cast<double>(i) * h - s.location);
        }
    }
    return HybridDistribution(start, h, std::move(out));
}

/// Reading distribution W = G * w of a classical meter with profile g.
[[nodiscard]] inline HybridDistribution convolve_readings(const HybridDistribution &w,
                                                          const ApparatusProfile &g) {
    if (g.is_delta()) {
        return w;
    }
    return convolve_with_kernel(
        w, [&g](double f) { return g.density(f); }, g.half_width(), g.alpha() / 32.0, true);
}

/// <f^n>_W from the moments of G and w (index 0 holds the zeroth moment, 1).
[[nodiscard]] inline double binomial_moment(std::span<const double> g_moments,
                                            std::span<const double> w_moments, int n) {
    detail::require(n >= 0 && static_cast<std::size_t>(n) < g_moments.size() &&
                        static_cast<std::size_t>(n) < w_moments.size(),
                    "binomial_moment: not enough input moments");
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
        s += numeric::binomial(n, k) * g_moments[static_cast<std::size_t>(k)] *
             w_moments[static_cast<std::size_t>(n - k)];
    }
    return s;
}

/// Characteristic function <exp(-i lambda f)> of a (normalised) distribution.
[[nodiscard]] inline cplx characteristic(const HybridDistribution &d, double lambda) {
    std::vector<cplx> v(d.values());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] *= std::polar(1.0, -lambda * d.abscissa(i));
    }
    std::vector<Spike> sp(d.spikes());
    for (auto &s : sp) {
        s.weight *= std::polar(1.0, -lambda * s.location);
    }
    return total_integral(HybridDistribution(d.grid_start(), d.grid_step(), std::move(v),
                                             std::move(sp)));
}

/**
 * Draws from a real non-negative HybridDistribution by inverting its CDF:
 * cells of the piecewise-linear smooth part and spike atoms share one
 * cumulative table.
 */
class InverseCdfSampler {
  public:
    explicit InverseCdfSampler(const HybridDistribution &d) : d_(d) {
        const double scale = std::max(d.max_abs_value(), 1e-300);
        for (const auto &v : d.values()) {
            detail::require(std::abs(v.imag()) <= 1e-14 * scale && v.real() >= -1e-14 * scale,
                            "sampling needs a non-negative real distribution");
        }
        for (const auto &s : d.spikes()) {
            detail::require(std::abs(s.weight.imag()) == 0.0 && s.weight.real() >= 0.0,
                            "sampling needs non-negative real spike weights");
        }
        double acc = 0.0;
        const auto &v = d.values();
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const double m = 0.5 * (std::max(v[i].real(), 0.0) + std::max(v[i + 1].real(), 0.0)) *
                             d.grid_step();
            acc += m;
            cum_.push_back(acc);
        }
        for (const auto &s : d.spikes()) {
            acc += s.weight.real();
            cum_.push_back(acc);
        }
        detail::require(acc > 0.0, "sampling needs positive total weight");
        total_ = acc;
        cells_ = v.empty() ? 0 : v.size() - 1;
        // guide table: bucket b starts the search at the first entry whose
        // cumulative weight exceeds b * total / M, giving O(1) expected lookups
        const std::size_t m = cum_.size();
        guide_.resize(m);
        std::size_t i = 0;
        for (std::size_t b = 0; b < m; ++b) {
            const double edge = total_ * static_cast<double>(b) / static_cast<double>(m);
            while (i + 1 < m && cum_[i] <= edge) {
                ++i;
            }
            guide_[b] = i;
        }
    }

    /// `rng` must produce 64 uniformly random bits per call (std::mt19937_64).
    template <class Rng> double operator()(Rng &rng) const {
        // top 53 bits of one 64-bit draw -> uniform in [0, 1)
        const double r01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double u = r01 * total_;
        const std::size_t m = cum_.size();
        auto idx = guide_[std::min(m - 1, static_cast<std::size_t>(r01 * static_cast<double>(m)))];
        while (idx + 1 < m && cum_[idx] <= u) {
            ++idx;
        }
        if (idx >= cells_) {
            return d_.spikes()[idx - cells_].location;
        }
        const double before = idx == 0 ? 0.0 : cum_[idx - 1];
        const double mass = cum_[idx] - before;
        const double v0 = std::max(d_.values()[idx].real(), 0.0);
        const double v1 = std::max(d_.values()[idx + 1].real(), 0.0);
        const double h = d_.grid_step();
        const double q = mass > 0.0 ? std::clamp((u - before) / mass, 0.0, 1.0) : 0.5;
        double t = q;
        if (std::abs(v1 - v0) > 1e-12 * (v0 + v1)) {
            // invert the quadratic CDF of a linear density on the cell
            t = (-v0 + std::sqrt(v0 * v0 + (v1 * v1 - v0 * v0) * q)) / (v1 - v0);
        }
        return d_.abscissa(idx) + std::clamp(t, 0.0, 1.0) * h;
    }

  private:
    HybridDistribution d_;
    std::vector<double> cum_;
    std::vector<std::size_t> guide_;
    double total_ = 0.0;
    std::size_t cells_ = 0;
};

/// One meter reading = true value drawn from w plus pointer offset drawn from G.
class NoisyMeterSampler {
  public:
    NoisyMeterSampler(const HybridDistribution &w, const ApparatusProfile &g)
        : w_(w), g_(g.is_delta() ? HybridDistribution::from_spikes({{0.0, cplx(1.0)}})
                                 : HybridDistribution::sample(
                                       -g.half_width(), g.half_width(), 4097,
                                       [&g](double f) { return g.density(f); })) {}

    template <class Rng> double operator()(Rng &rng) const { return w_(rng) + g_(rng); }

  private:
    InverseCdfSampler w_;
    InverseCdfSampler g_;
};

struct NoisyEstimate {
    double mean = 0.0;
    double second_moment = 0.0;
    double se_mean = 0.0;
    double se_second_moment = 0.0;
};

/**
 * Estimate <f>_w and <f^2>_w from N noisy readings. The second moment is
 * bias-corrected by subtracting <f^2>_G.
 */
[[nodiscard]] inline NoisyEstimate estimate_from_noisy_readings(const HybridDistribution &w,
                                                                const ApparatusProfile &g,
                                                                std::size_t n,
                                                                std::uint64_t seed) {
    detail::require(n >= 1, "estimate_from_noisy_readings: N must be >= 1");
    NoisyMeterSampler sampler(w, g);
    std::mt19937_64 rng(seed);
    double s1 = 0.0;
    double s2 = 0.0;
    double s4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = sampler(rng);
        s1 += f;
        s2 += f * f;
        s4 += f * f * f * f;
    }
    const auto dn = static_cast<double>(n);
    NoisyEstimate e;
    e.mean = s1 / dn;
    const double m2 = s2 / dn;
    e.second_moment = m2 - (g.is_delta() ? 0.0 : g.density_second_moment());
    if (n > 1) {
        e.se_mean = std::sqrt(std::max(m2 - e.mean * e.mean, 0.0) / (dn - 1.0));
        e.se_second_moment = std::sqrt(std::max(s4 / dn - m2 * m2, 0.0) / (dn - 1.0));
    }
    return e;
}

struct RequiredSamplesPoint {
    double alpha = 0.0;
    std::size_t n = 0;
    double success_rate = 0.0;
};

struct RequiredSamplesStudy {
    std::vector<RequiredSamplesPoint> points;
    double exponent = 0.0;  ///< slope of log N against log alpha
    double intercept = 0.0;
};

/**
 * For each alpha, the smallest N on the ladder N_i = ceil(2^(i/4)) for which
 * |mean estimate - <f>_w| < delta in at least `confidence` of `reps`
 * independent repetitions; then a least-squares fit of log N on log alpha.
 */
[[nodiscard]] inline RequiredSamplesStudy
required_samples_study(const HybridDistribution &w, const ApparatusProfile &shape,
                       const std::vector<double> &alphas, double delta, double confidence,
                       std::size_t reps, std::uint64_t seed) {
    detail::require(!alphas.empty() && delta > 0.0 && confidence > 0.0 && confidence < 1.0 &&
                        reps >= 1,
                    "required_samples_study: bad parameters");
    const auto truth_report = moments(w, 1);
    detail::require(!truth_report.degenerate, "required_samples_study: degenerate w");
    const double truth = truth_report.mean().real();
    RequiredSamplesStudy study;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const auto g = shape.with_alpha(alphas[ai]);
        NoisyMeterSampler sampler(w, g);
        auto ladder = [](int i) {
            return static_cast<std::size_t>(std::ceil(std::pow(2.0, i / 4.0)));
        };
        auto rate = [&](int i) {
            const std::size_t n = ladder(i);
            std::seed_seq seq{seed, static_cast<std::uint64_t>(ai), static_cast<std::uint64_t>(i)};
            std::mt19937_64 rng(seq);
            std::size_t ok = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += sampler(rng);
                }
                if (std::abs(s / static_cast<double>(n) - truth) < delta) {
                    ++ok;
                }
            }
            return static_cast<double>(ok) / static_cast<double>(reps);
        };
        // A pilot run estimates the spread of a single reading; the ladder
        // search then starts a few rungs below the normal-theory guess. The
        // answer itself always comes from the Monte-Carlo success rates.
        int start = 0;
        {
            std::seed_seq seq{seed, static_cast<std::uint64_t>(ai), std::uint64_t{0xfffff}};
            std::mt19937_64 rng(seq);
            constexpr std::size_t pilot = 20000;
            double s1 = 0.0;
            double s2 = 0.0;
            for (std::size_t k = 0; k < pilot; ++k) {
                const double f = sampler(rng);
                s1 += f;
                s2 += f * f;
            }
            const double var = s2 / pilot - (s1 / pilot) * (s1 / pilot);
            const double guess = var * 3.8416 / (delta * delta);
            start = std::max(0, static_cast<int>(std::floor(4.0 * std::log2(std::max(guess, 1.0)))) - 4);
        }
        int lo = start - 1;
        int hi = start;
        double hi_rate = rate(hi);
        if (hi_rate >= confidence) {
            // guess was too high: walk down in doubling steps
            while (lo >= 0) {
                const double r = rate(lo);
                if (r < confidence) {
                    break;
                }
                hi = lo;
                hi_rate = r;
                lo = std::max(-1, lo - 4);
            }
        }
        while (hi_rate < confidence) {
            lo = hi;
            hi += 4;
            detail::require_numeric(hi < 200, "required_samples_study: N ladder exhausted");
            hi_rate = rate(hi);
        }
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            const double r = rate(mid);
            if (r >= confidence) {
                hi = mid;
                hi_rate = r;
            } else {
                lo = mid;
            }
        }
        study.points.push_back({alphas[ai], ladder(hi), hi_rate});
    }
    if (study.points.size() >= 2) {
        double sx = 0.0;
        double sy = 0.0;
        double sxx = 0.0;
        double sxy = 0.0;
        for (const auto &p : study.points) {
            const double x = std::log(p.alpha);
            const double y = std::log(static_cast<double>(p.n));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const auto m = static_cast<double>(study.points.size());
        study.exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        study.intercept = (sy - study.exponent * sx) / m;
    }
    return study;
}

/// Free particle with Gaussian-distributed initial momentum and position.
struct FreeParticleEnsemble {
    enum class Observable { position, region_indicator };
    enum class Switching { impulsive, constant };

    double p_mean = 1.0;
    double p_sd = 0.0;
    double x_mean = 0.0;
    double x_sd = 0.0;
    Observable observable = Observable::position;
    double region_length = 1.0;  ///< region is [0, L]
    Switching switching = Switching::impulsive;
    double t0 = 0.0;             ///< impulsive coupling time
    double total_time = 1.0;
    double beta = 1.0;           ///< constant switching value

    void validate() const {
        detail::require(p_sd >= 0.0 && x_sd >= 0.0, "ensemble widths must be >= 0");
        detail::require(total_time > 0.0, "total_time must be positive");
        detail::require(t0 >= 0.0 && t0 <= total_time, "t0 must lie in [0, t]");
        detail::require(region_length > 0.0, "region length must be positive");
    }
};

/// Value of the measured functional on the trajectory x(t) = X + P t.
[[nodiscard]] inline double functional_value(const FreeParticleEnsemble &e, double p, double x) {
    using E = FreeParticleEnsemble;
    if (e.switching == E::Switching::impulsive) {
        const double xt = x + p * e.t0;
        if (e.observable == E::Observable::position) {
            return xt;
        }
        return (xt >= 0.0 && xt <= e.region_length) ? 1.0 : 0.0;
    }
    const double t = e.total_time;
    if (e.observable == E::Observable::position) {
        return e.beta * (x * t + 0.5 * p * t * t);
    }
    // time spent with 0 <= X + P t' <= L, t' in [0, t]
    double lo = 0.0;
    double hi = t;
    if (p == 0.0) {
        return (x >= 0.0 && x <= e.region_length) ? e.beta * t : 0.0;
    }
    double ta = (0.0 - x) / p;
    double tb = (e.region_length - x) / p;
    if (ta > tb) {
        std::swap(ta, tb);
    }
    lo = std::max(lo, ta);
    hi = std::min(hi, tb);
    return hi > lo ? e.beta * (hi - lo) : 0.0;
}

struct HistogramSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 64;
};

struct FunctionalSample {
    HybridDistribution histogram;  ///< density estimate at bin centres
    double mean = 0.0;
    double second_moment = 0.0;
    double se_mean = 0.0;
};

[[nodiscard]] inline FunctionalSample functional_distribution(const FreeParticleEnsemble &e,
                                                              std::size_t n_samples,
                                                              const HistogramSpec &bins,
                                                              std::uint64_t seed) {
    e.validate();
    detail::require(n_samples >= 100, "functional_distribution: need at least 100 samples");
    detail::require(bins.bins >= 2 && bins.hi > bins.lo, "functional_distribution: bad bins");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> np(e.p_mean, e.p_sd);
    std::normal_distribution<double> nx(e.x_mean, e.x_sd);
    const double width = (bins.hi - bins.lo) / static_cast<double>(bins.bins);
    std::vector<double> counts(bins.bins, 0.0);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double p = e.p_sd > 0.0 ? np(rng) : e.p_mean;
        const double x = e.x_sd > 0.0 ? nx(rng) : e.x_mean;
        const double f = functional_value(e, p, x);
        s1 += f;
        s2 += f * f;
        const double b = (f - bins.lo) / width;
        if (b >= 0.0 && b < static_cast<double>(bins.bins)) {
            counts[static_cast<std::size_t>(b)] += 1.0;
        } else if (f == bins.hi) {
            counts.back() += 1.0;
        }
    }
    const auto dn = static_cast<double>(n_samples);
    std::vector<cplx> v(bins.bins);
    for (std::size_t i = 0; i < bins.bins; ++i) {
        v[i] = counts[i] / (dn * width);
    }
    FunctionalSample out;
    out.histogram = HybridDistribution(bins.lo + 0.5 * width, width, std::move(v));
    out.mean = s1 / dn;
    out.second_moment = s2 / dn;
    out.se_mean = std::sqrt(std::max(out.second_moment - out.mean * out.mean, 0.0) / (dn - 1.0));
    return out;
}

} // namespace weakval
