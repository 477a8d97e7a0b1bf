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
 * Proper, improper (sign-alternating) and complex distributions.
 *
 * A HybridDistribution is a uniformly sampled complex density plus a list of
 * point masses. Smooth parts integrate by the trapezoid rule, spikes exactly.
 * Nothing here assumes the density is non-negative or even real: the whole
 * point is to compute "moments" of distributions whose normalisation may be
 * small, negative or complex.
 */

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "error.hpp"
#include "numeric.hpp"

namespace weakval {

struct Spike {
    double location;
    cplx weight;
};

class HybridDistribution {
  public:
    HybridDistribution() = default;

    HybridDistribution(double grid_start, double grid_step,
                       std::vector<cplx> values, std::vector<Spike> spikes = {})
        : start_(grid_start), step_(grid_step), values_(std::move(values)),
          spikes_(std::move(spikes)) {
        detail::require(std::isfinite(start_), "grid_start must be finite");
        detail::require(step_ > 0.0 && std::isfinite(step_),
                        "grid_step must be positive");
        detail::require(values_.empty() || values_.size() >= 2,
                        "smooth part needs at least two samples");
        for (const auto &v : values_) {
            detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                            "smooth samples must be finite");
        }
        merge_spikes();
    }

    static HybridDistribution from_spikes(std::vector<Spike> spikes) {
        return HybridDistribution(0.0, 1.0, {}, std::move(spikes));
    }

    /// Sample f on n uniformly spaced points covering [a, b].
    template <class F>
    static HybridDistribution sample(double a, double b, std::size_t n, F &&f) {
        detail::require(n >= 2 && b > a, "sample: need n >= 2 and b > a");
        const double h = (b - a) / static_cast<double>(n - 1);
        std::vector<cplx> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = cplx(f(a + static_cast<double>(i) * h));
        }
        return HybridDistribution(a, h, std::move(v));
    }

    [[nodiscard]] double grid_start() const noexcept { return start_; }
    [[nodiscard]] double grid_step() const noexcept { return step_; }
    [[nodiscard]] double grid_end() const noexcept {
        return values_.empty() ? start_ : abscissa(values_.size() - 1);
    }
    [[nodiscard]] double abscissa(std::size_t i) const noexcept {
        return start_ + static_cast<double>(i) * step_;
    }
    [[nodiscard]] const std::vector<cplx> &values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<Spike> &spikes() const noexcept { return spikes_; }
    [[nodiscard]] bool has_smooth() const noexcept { return !values_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    /// Lowest and highest abscissa carrying any (smooth or spike) content.
    [[nodiscard]] std::pair<double, double> support_bounds() const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        if (has_smooth()) {
            lo = start_;
            hi = grid_end();
        }
        for (const auto &s : spikes_) {
            lo = std::min(lo, s.location);
            hi = std::max(hi, s.location);
        }
        return {lo, hi};
    }

    [[nodiscard]] double max_abs_value() const {
        double m = 0.0;
        for (const auto &v : values_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    [[nodiscard]] double total_spike_magnitude() const {
        double s = 0.0;
        for (const auto &sp : spikes_) {
            s += std::abs(sp.weight);
        }
        return s;
    }

    [[nodiscard]] HybridDistribution scaled(cplx c) const {
        auto out = *this;
        for (auto &v : out.values_) {
            v *= c;
        }
        for (auto &s : out.spikes_) {
            s.weight *= c;
        }
        return out;
    }

    template <class F> [[nodiscard]] HybridDistribution transformed(F &&op) const {
        auto out = *this;
        for (auto &v : out.values_) {
            v = op(v);
        }
        for (auto &s : out.spikes_) {
            s.weight = op(s.weight);
        }
        return out;
    }

    [[nodiscard]] HybridDistribution real_part() const {
        return transformed([](cplx z) { return cplx(z.real(), 0.0); });
    }
    [[nodiscard]] HybridDistribution imag_part() const {
        return transformed([](cplx z) { return cplx(z.imag(), 0.0); });
    }

    /// Sum of two distributions; smooth parts must share a grid.
    friend HybridDistribution operator+(const HybridDistribution &a,
                                        const HybridDistribution &b) {
        std::vector<cplx> values;
        double start = a.start_;
        double step = a.step_;
        if (a.has_smooth() && b.has_smooth()) {
            detail::require(a.values_.size() == b.values_.size() &&
                                std::abs(a.start_ - b.start_) <= 1e-12 * (1.0 + std::abs(a.start_)) &&
                                std::abs(a.step_ - b.step_) <= 1e-12 * a.step_,
                            "operator+: smooth parts live on different grids");
            values = a.values_;
            for (std::size_t i = 0; i < values.size(); ++i) {
                values[i] += b.values_[i];
            }
        } else if (a.has_smooth()) {
            values = a.values_;
        } else if (b.has_smooth()) {
            values = b.values_;
            start = b.start_;
            step = b.step_;
        }
        auto spikes = a.spikes_;
        spikes.insert(spikes.end(), b.spikes_.begin(), b.spikes_.end());
        return HybridDistribution(start, step, std::move(values), std::move(spikes));
    }

  private:
    void merge_spikes() {
        for (const auto &s : spikes_) {
            detail::require(std::isfinite(s.location), "spike location must be finite");
        }
        std::sort(spikes_.begin(), spikes_.end(),
                  [](const Spike &a, const Spike &b) { return a.location < b.location; });
        std::vector<Spike> merged;
        for (const auto &s : spikes_) {
            if (!merged.empty()) {
                auto &last = merged.back();
                const double tol = 1e-12 * std::max(1.0, std::abs(s.location));
                if (std::abs(s.location - last.location) <= tol) {
                    last.weight += s.weight;
                    continue;
                }
            }
            merged.push_back(s);
        }
        spikes_ = std::move(merged);
    }

    double start_ = 0.0;
    double step_ = 1.0;
    std::vector<cplx> values_;
    std::vector<Spike> spikes_;
};

/**
 * Integral over [a, b]: the piecewise-linear interpolant of the smooth part
 * (trapezoid rule on full cells) plus spikes with a <= location <= b.
 */
[[nodiscard]] inline cplx integrate(const HybridDistribution &d, double a, double b) {
    detail::require(std::isfinite(a) && std::isfinite(b) && a <= b,
                    "integrate: need finite a <= b");
    cplx total{};
    if (d.has_smooth()) {
        const auto &v = d.values();
        const double h = d.grid_step();
        const double lo = std::max(a, d.grid_start());
        const double hi = std::min(b, d.grid_end());
        if (hi > lo) {
            auto value_at = [&](double x) {
                const double s = (x - d.grid_start()) / h;
                auto i = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0,
                                                             static_cast<double>(v.size() - 2)));
                const double t = s - static_cast<double>(i);
                return v[i] * (1.0 - t) + v[i + 1] * t;
            };
            // interior nodes strictly inside (lo, hi)
            const double s_lo = (lo - d.grid_start()) / h;
            const double s_hi = (hi - d.grid_start()) / h;
            auto first = static_cast<std::size_t>(std::ceil(s_lo - 1e-12));
            auto last = static_cast<std::size_t>(std::floor(s_hi + 1e-12));
            if (first > last) {
                total += 0.5 * (value_at(lo) + value_at(hi)) * (hi - lo);
            } else {
                const double x_first = d.abscissa(first);
                const double x_last = d.abscissa(last);
                total += 0.5 * (value_at(lo) + v[first]) * (x_first - lo);
                for (std::size_t i = first; i < last; ++i) {
                    total += 0.5 * (v[i] + v[i + 1]) * h;
                }
                total += 0.5 * (v[last] + value_at(hi)) * (hi - x_last);
            }
        }
    }
    for (const auto &s : d.spikes()) {
        if (s.location >= a && s.location <= b) {
            total += s.weight;
        }
    }
    return total;
}

/// Integral over the whole support.
[[nodiscard]] inline cplx total_integral(const HybridDistribution &d) {
    cplx total{};
    if (d.has_smooth()) {
        total += numeric::trapezoid<cplx>(d.values(), d.grid_step());
    }
    for (const auto &s : d.spikes()) {
        total += s.weight;
    }
    return total;
}

namespace detail {

/// Trapezoid sums of f^n d(f) for n = 0..max_n in one pass over the grid.
inline std::vector<cplx> moment_sums(const HybridDistribution &d, int max_n) {
    std::vector<cplx> out(static_cast<std::size_t>(max_n) + 1);
    if (d.has_smooth()) {
        const auto &v = d.values();
        const std::size_t last = v.size() - 1;
        for (std::size_t i = 0; i <= last; ++i) {
            const double x = d.abscissa(i);
            cplx term = (i == 0 || i == last) ? 0.5 * v[i] : v[i];
            for (auto &o : out) {
                o += term;
                term *= x;
            }
        }
        for (auto &o : out) {
            o *= d.grid_step();
        }
    }
    for (const auto &s : d.spikes()) {
        cplx term = s.weight;
        for (auto &o : out) {
            o += term;
            term *= s.location;
        }
    }
    return out;
}

} // namespace detail

/// Unnormalised moment  integral f^n d(f) df.
[[nodiscard]] inline cplx raw_integral_moment(const HybridDistribution &d, int n) {
    detail::require(n >= 0, "raw_integral_moment: order must be >= 0");
    return detail::moment_sums(d, n).back();
}

/// Default threshold below which |norm| is treated as vanishing.
[[nodiscard]] inline double degeneracy_threshold(const HybridDistribution &d) {
    double scale = d.total_spike_magnitude();
    if (d.has_smooth()) {
        scale += d.max_abs_value() * (d.grid_end() - d.grid_start());
    }
    return 1e-12 * scale;
}

struct MomentReport {
    cplx norm{};
    /// raw_moments[n - 1] holds <f^n>; empty when degenerate.
    std::vector<cplx> raw_moments;
    cplx variance{};
    bool degenerate = false;
    double threshold = 0.0;

    [[nodiscard]] cplx mean() const { return raw_moments.at(0); }
};

[[nodiscard]] inline MomentReport moments(const HybridDistribution &d, int max_order,
                                          std::optional<double> threshold = std::nullopt) {
    detail::require(max_order >= 1, "moments: max_order must be >= 1");
    MomentReport r;
    const auto sums = detail::moment_sums(d, std::max(max_order, 2));
    r.norm = sums[0];
    r.threshold = threshold.value_or(degeneracy_threshold(d));
    if (std::abs(r.norm) <= r.threshold) {
        r.degenerate = true;
        return r;
    }
    for (std::size_t n = 1; n < sums.size(); ++n) {
        r.raw_moments.push_back(sums[n] / r.norm);
    }
    r.variance = r.raw_moments[1] - r.raw_moments[0] * r.raw_moments[0];
    r.raw_moments.resize(static_cast<std::size_t>(max_order));
    return r;
}

/// Real and imaginary parts of w = d / integral(d); integral(w1) = 1, integral(w2) = 0.
struct ComplexSplit {
    HybridDistribution w1;
    HybridDistribution w2;
    cplx norm{};
};

[[nodiscard]] inline ComplexSplit decompose_complex(const HybridDistribution &d) {
    const cplx norm = total_integral(d);
    const double thr = degeneracy_threshold(d);
    if (std::abs(norm) <= thr) {
        throw DegenerateNormalization("decompose_complex: vanishing normalisation",
                                      std::abs(norm));
    }
    const auto w = d.scaled(1.0 / norm);
    return {w.real_part(), w.imag_part(), norm};
}

/// rho(f) = sin(2 pi f) + eps on [0, 1], sampled on n points.
[[nodiscard]] inline HybridDistribution sine_family(double eps, std::size_t n) {
    return HybridDistribution::sample(0.0, 1.0, n, [eps](double f) {
        return std::sin(2.0 * pi * f) + eps;
    });
}

struct ZeroLocus {
    std::vector<double> roots;
    bool identically_zero = false;
};

/**
 * Parameter values in [lo, hi] where the (real part of the) variance of a
 * one-parameter family vanishes. The bracket is scanned on `scan` cells and
 * each sign change is refined to a bracket of width `tolerance`.
 */
template <class Family>
[[nodiscard]] ZeroLocus variance_zero_locus(Family &&family, double lo, double hi,
                                            double tolerance = 1e-10,
                                            std::size_t scan = 64) {
    detail::require(lo < hi && scan >= 1, "variance_zero_locus: bad bracket");
    auto variance = [&](double p) -> double {
        const auto r = moments(family(p), 2);
        if (r.degenerate) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return r.variance.real();
    };
    ZeroLocus out;
    std::vector<double> xs(scan + 1);
    std::vector<double> vs(scan + 1);
    bool all_zero = true;
    for (std::size_t i = 0; i <= scan; ++i) {
        xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan);
        vs[i] = variance(xs[i]);
        if (!(std::abs(vs[i]) <= 1e-14)) {
            all_zero = false;
        }
    }
    if (all_zero) {
        out.identically_zero = true;
        return out;
    }
    for (std::size_t i = 0; i < scan; ++i) {
        double a = xs[i];
        double b = xs[i + 1];
        double va = vs[i];
        const double vb = vs[i + 1];
        if (!std::isfinite(va) || !std::isfinite(vb)) {
            continue;
        }
        if (va == 0.0) {
            out.roots.push_back(a);
            continue;
        }
        if ((va < 0.0) == (vb < 0.0)) {
            continue;
        }
        // TOMS 748 keeps a bracket like bisection but converges superlinearly
        std::uintmax_t iterations = 200;
        auto [ra, rb] = boost::math::tools::toms748_solve(
            variance, a, b, va, vb,
            [tolerance](double x, double y) { return std::abs(y - x) <= tolerance; }, iterations);
        a = ra;
        b = rb;
        out.roots.push_back(0.5 * (a + b));
    }
    return out;
}

namespace csv {

namespace detail_fmt {
inline std::string num(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}
} // namespace detail_fmt

/// Smooth part as `f,re,im` rows (LF endings, shortest round-trip doubles).
inline void write_smooth(std::ostream &os, const HybridDistribution &d,
                         const std::string &header = "f,re,im") {
    os << header << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        os << detail_fmt::num(d.abscissa(i)) << ',' << detail_fmt::num(d.values()[i].real())
           << ',' << detail_fmt::num(d.values()[i].imag()) << '\n';
    }
}

/// Spikes as `location,re,im` rows.
inline void write_spikes(std::ostream &os, const HybridDistribution &d) {
    os << "location,re,im\n";
    for (const auto &s : d.spikes()) {
        os << detail_fmt::num(s.location) << ',' << detail_fmt::num(s.weight.real()) << ','
           << detail_fmt::num(s.weight.imag()) << '\n';
    }
}

namespace detail_parse {
inline std::vector<std::array<double, 3>> rows(std::istream &is) {
    std::vector<std::array<double, 3>> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        std::array<double, 3> r{};
        std::size_t pos = 0;
        for (int c = 0; c < 3; ++c) {
            const auto comma = line.find(',', pos);
            const auto field = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos);
            const auto *first = field.data();
            const auto *last = field.data() + field.size();
            auto [ptr, ec] = std::from_chars(first, last, r[static_cast<std::size_t>(c)]);
            weakval::detail::require(ec == std::errc() && ptr == last &&
                                         std::isfinite(r[static_cast<std::size_t>(c)]),
                                     "csv line " + std::to_string(lineno) + ": bad number");
            weakval::detail::require((c < 2) == (comma != std::string::npos),
                                     "csv line " + std::to_string(lineno) +
                                         ": expected three columns");
            pos = comma + 1;
        }
        out.push_back(r);
    }
    return out;
}
} // namespace detail_parse

/// Read back what write_smooth / write_spikes produced. `spikes` may be null.
[[nodiscard]] inline HybridDistribution read(std::istream &smooth, std::istream *spikes) {
    const auto rows = detail_parse::rows(smooth);
    std::vector<cplx> values;
    double start = 0.0;
    double step = 1.0;
    if (!rows.empty()) {
        weakval::detail::require(rows.size() >= 2, "csv: smooth part needs two rows");
        start = rows.front()[0];
        step = (rows.back()[0] - start) / static_cast<double>(rows.size() - 1);
        for (const auto &r : rows) {
            values.emplace_back(r[1], r[2]);
        }
    }
    std::vector<Spike> sp;
    if (spikes != nullptr) {
        for (const auto &r : detail_parse::rows(*spikes)) {
            sp.push_back({r[0], cplx(r[1], r[2])});
        }
    }
    return HybridDistribution(start, step, std::move(values), std::move(sp));
}

} // namespace csv
} // namespace weakval
