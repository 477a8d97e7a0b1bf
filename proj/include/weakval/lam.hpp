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

// Partial-wave amplitudes and the local angular momentum
//
//   LAM(theta) = Re[-i d ln f / d theta] = sum_L L w_L(theta),  L even,
//
// where w_L = Re[Phi_L / sum Phi] and Phi_L are the Fourier components of f
// on [0, pi]. Whenever odd partial waves are present the pi-periodic
// extension of f jumps at the endpoints, so the raw series only converges
// like 1/L and sum L Phi_L does not converge at all. The Fourier sums are
// therefore taken with a smooth exponential filter, which restores spectral
// convergence at interior angles.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "weakval/error.hpp"
#include "weakval/numeric.hpp"

namespace weakval {

struct PartialWaveSet {
    double energy = 0.0;
    double k = 1.0;
    std::vector<cplx> s_elements; // S^J for J = 0..J_max
    /// Overall factor in front of the partial-wave sum; (ik)^{-1/2} if unset.
    std::optional<cplx> prefactor;

    [[nodiscard]] int j_max() const { return static_cast<int>(s_elements.size()) - 1; }

    [[nodiscard]] cplx scale() const {
        return prefactor ? *prefactor : 1.0 / std::sqrt(I * k);
    }

    void validate() const {
        detail::require(std::isfinite(k) && k > 0.0, "partial waves: k must be positive");
        detail::require(std::isfinite(energy), "partial waves: energy must be finite");
        detail::require(!s_elements.empty(), "partial waves: need at least one S-matrix element");
        for (std::size_t j = 0; j < s_elements.size(); ++j) {
            detail::require(std::isfinite(s_elements[j].real()) &&
                                std::isfinite(s_elements[j].imag()),
                            "partial waves: S^" + std::to_string(j) + " is not finite");
        }
        if (prefactor) {
            detail::require(std::isfinite(std::abs(*prefactor)) && std::abs(*prefactor) > 0.0,
                            "partial waves: prefactor must be finite and nonzero");
        }
    }
};

namespace detail {

inline void require_angle(double theta) {
    require(theta > 0.0 && theta < pi, "scattering angle must lie in (0, pi)");
}

/// f and df/dtheta by upward Legendre recurrence.
inline std::pair<cplx, cplx> partial_wave_sum(const PartialWaveSet &pw, double theta) {
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    cplx f = 0.0;
    cplx df = 0.0;
    double p_prev = 0.0;
    double p = 1.0;
    for (int j = 0; j <= pw.j_max(); ++j) {
        const double dj = j;
        // dP_J(cos t)/dt = -J (P_{J-1} - x P_J) / sin t
        const double dp = (j == 0) ? 0.0 : -dj * (p_prev - x * p) / s;
        f += (dj + 0.5) * p * pw.s_elements[static_cast<std::size_t>(j)];
        df += (dj + 0.5) * dp * pw.s_elements[static_cast<std::size_t>(j)];
        const double p_next = ((2.0 * dj + 1.0) * x * p - dj * p_prev) / (dj + 1.0);
        p_prev = p;
        p = p_next;
    }
    return {pw.scale() * f, pw.scale() * df};
}

/// Rough size of |f| had there been no cancellation.
inline double partial_wave_magnitude(const PartialWaveSet &pw) {
    double m = 0.0;
    for (int j = 0; j <= pw.j_max(); ++j) {
        m += (j + 0.5) * std::abs(pw.s_elements[static_cast<std::size_t>(j)]);
    }
    return m * std::abs(pw.scale());
}

} // namespace detail

[[nodiscard]] inline cplx amplitude(const PartialWaveSet &pw, double theta) {
    pw.validate();
    detail::require_angle(theta);
    return detail::partial_wave_sum(pw, theta).first;
}

[[nodiscard]] inline double differential_cross_section(const PartialWaveSet &pw, double theta) {
    return std::norm(amplitude(pw, theta));
}

[[nodiscard]] inline double lam(const PartialWaveSet &pw, double theta) {
    pw.validate();
    detail::require_angle(theta);
    auto [f, df] = detail::partial_wave_sum(pw, theta);
    const double scale = detail::partial_wave_magnitude(pw);
    if (!(std::abs(f) > 1e-14 * scale)) {
        throw DegenerateNormalization("lam: amplitude vanishes at theta = " + std::to_string(theta),
                                      std::abs(f));
    }
    return (-I * df / f).real();
}

/**
 * LAM of an arbitrary amplitude from the unwrapped phase: arg f(t+h)/f(t-h)
 * over 2h, Richardson-extrapolated. Exact for a linear phase.
 */
[[nodiscard]] inline double lam(const std::function<cplx(double)> &f, double theta,
                                double h = 1e-4) {
    detail::require(h > 0.0, "lam: step must be positive");
    auto slope = [&](double step) {
        const cplx a = f(theta + step);
        const cplx b = f(theta - step);
        if (!(std::abs(a) > 0.0 && std::abs(b) > 0.0)) {
            throw DegenerateNormalization("lam: amplitude vanishes near theta", 0.0);
        }
        return std::arg(a / b) / (2.0 * step);
    };
    const double coarse = slope(h);
    const double fine = slope(h / 2.0);
    return fine + (fine - coarse) / 3.0;
}

struct LamOptions {
    int l_max = 2048;               // even; modes L = -l_max, ..., l_max
    std::size_t panels = 4096;      // Filon-Simpson panels on [0, pi]; even
    double filter_strength = 36.0;  // sigma(L) = exp(-strength (|L|/l_max)^order)
    int filter_order = 8;
    double reconstruction_tolerance = 1e-6;
    double edge_margin = 0.02 * pi; // reported angles lie in [margin, pi - margin]
};

struct LamDecomposition {
    double theta = 0.0;
    std::vector<int> l;
    std::vector<cplx> phi;   // filtered Phi_L(theta)
    std::vector<double> w;   // Re[Phi_L / sum Phi]
    double lam = 0.0;        // sum L w_L
    cplx reconstructed;      // sum Phi_L
    double reconstruction_error = 0.0;

    [[nodiscard]] double weight_sum() const {
        double s = 0.0;
        for (double x : w) {
            s += x;
        }
        return s;
    }
};

/**
 * Filtered Fourier coefficients c_L = pi^-1 int_0^pi f e^{-iL t} dt of an
 * amplitude, computed once and then evaluated at any angle.
 */
class LamSpectrum {
  public:
    LamSpectrum(const std::function<cplx(double)> &f, LamOptions opt = {}) : opt_(opt) {
        detail::require(opt_.l_max >= 0 && opt_.l_max % 2 == 0, "lam: l_max must be even");
        detail::require(opt_.panels >= 2 && opt_.panels % 2 == 0,
                        "lam: panel count must be even");
        detail::require(opt_.filter_order >= 2 && opt_.filter_strength >= 0.0,
                        "lam: bad filter parameters");
        detail::require(opt_.edge_margin >= 0.0 && opt_.edge_margin < pi / 2,
                        "lam: edge margin must lie in [0, pi/2)");
        const std::size_t n = opt_.panels;
        const double h = pi / static_cast<double>(n);
        std::vector<cplx> y(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            y[i] = f(static_cast<double>(i) * h);
            detail::require(std::isfinite(std::abs(y[i])), "lam: amplitude is not finite");
        }
        for (int l = -opt_.l_max; l <= opt_.l_max; l += 2) {
            const double x = opt_.l_max == 0 ? 0.0 : std::abs(l) / static_cast<double>(opt_.l_max);
            const double sigma = std::exp(-opt_.filter_strength * std::pow(x, opt_.filter_order));
            l_.push_back(l);
            c_.push_back(sigma * filon(y, h, l) / pi);
        }
    }

    LamSpectrum(const PartialWaveSet &pw, LamOptions opt = {})
        : LamSpectrum(
              [&pw](double t) {
                  // the endpoints are fine for the Legendre values themselves
                  const double x = std::cos(t);
                  cplx f = 0.0;
                  double p_prev = 0.0;
                  double p = 1.0;
                  for (int j = 0; j <= pw.j_max(); ++j) {
                      f += (j + 0.5) * p * pw.s_elements[static_cast<std::size_t>(j)];
                      const double next = ((2.0 * j + 1.0) * x * p - j * p_prev) / (j + 1.0);
                      p_prev = p;
                      p = next;
                  }
                  return pw.scale() * f;
              },
              (pw.validate(), opt)) {}

    [[nodiscard]] const std::vector<int> &modes() const { return l_; }
    [[nodiscard]] const std::vector<cplx> &coefficients() const { return c_; }

    /// Decomposition at theta; `exact` is f(theta) for the reconstruction check.
    [[nodiscard]] LamDecomposition at(double theta, cplx exact) const {
        const double slack = 1e-12; // angles written in decimal land a rounding away
        detail::require(theta >= opt_.edge_margin - slack && theta <= pi - opt_.edge_margin + slack,
                        "lam: theta too close to 0 or pi for the Fourier decomposition");
        LamDecomposition d;
        d.theta = theta;
        d.l = l_;
        d.phi.resize(l_.size());
        cplx total = 0.0;
        for (std::size_t i = 0; i < l_.size(); ++i) {
            d.phi[i] = c_[i] * std::polar(1.0, l_[i] * theta);
            total += d.phi[i];
        }
        d.reconstructed = total;
        d.reconstruction_error = std::abs(total - exact) / std::abs(exact);
        if (!(d.reconstruction_error < opt_.reconstruction_tolerance)) {
            throw PreconditionError("lam: Fourier reconstruction error " +
                                    std::to_string(d.reconstruction_error) + " at l_max = " +
                                    std::to_string(opt_.l_max) +
                                    "; increase l_max (and panels)");
        }
        d.w.resize(l_.size());
        for (std::size_t i = 0; i < l_.size(); ++i) {
            d.w[i] = (d.phi[i] / total).real();
            d.lam += l_[i] * d.w[i];
        }
        return d;
    }

  private:
    // Filon-Simpson: piecewise-quadratic interpolant times e^{-i w t},
    // integrated exactly panel pair by panel pair.
    static cplx filon(const std::vector<cplx> &y, double h, int l) {
        const double w = l;
        const double t = w * h;
        double m0;
        double m1; // imaginary part of int s e^{-iws}, over h^2
        double m2;
        if (std::abs(t) < 1e-2) {
            const double t2 = t * t;
            m0 = 2.0 * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0);
            m1 = -2.0 * t * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0);
            m2 = 2.0 * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0);
        } else {
            const double s = std::sin(t);
            const double c = std::cos(t);
            m0 = 2.0 * s / t;
            m1 = -2.0 * (s / (t * t) - c / t);
            m2 = 2.0 * (s / t + 2.0 * c / (t * t) - 2.0 * s / (t * t * t));
        }
        // on [-h, h]: int q(s) e^{-iws} ds with q = a + b s + c s^2
        cplx sum = 0.0;
        const cplx rot = std::polar(1.0, -2.0 * t);
        cplx phase = std::polar(1.0, -t); // e^{-i w t_mid} for the first pair
        for (std::size_t i = 0; i + 2 < y.size(); i += 2) {
            const cplx a = y[i + 1];
            const cplx b = (y[i + 2] - y[i]) / 2.0;           // times s/h
            const cplx cc = (y[i] - 2.0 * y[i + 1] + y[i + 2]) / 2.0; // times (s/h)^2
            sum += phase * (a * m0 + b * I * m1 + cc * m2);
            phase *= rot;
        }
        return sum * h;
    }

    LamOptions opt_;
    std::vector<int> l_;
    std::vector<cplx> c_;
};

[[nodiscard]] inline LamDecomposition decompose(const PartialWaveSet &pw, double theta,
                                                LamOptions opt = {}) {
    detail::require_angle(theta);
    return LamSpectrum(pw, opt).at(theta, amplitude(pw, theta));
}

[[nodiscard]] inline LamDecomposition decompose(const std::function<cplx(double)> &f,
                                                double theta, LamOptions opt = {}) {
    detail::require_angle(theta);
    return LamSpectrum(f, opt).at(theta, f(theta));
}

/// Partial waves from CSV with header `J,re,im`; J must run 0, 1, 2, ...
[[nodiscard]] inline PartialWaveSet read_partial_waves_csv(std::istream &is, double k = 1.0,
                                                           double energy = 0.0) {
    PartialWaveSet pw;
    pw.k = k;
    pw.energy = energy;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    auto fail = [&](const std::string &what) {
        throw InvalidArgument("partial waves, line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (!header) {
            std::string compact;
            std::remove_copy_if(line.begin(), line.end(), std::back_inserter(compact),
                                [](char ch) { return ch == ' ' || ch == '\t'; });
            if (compact != "J,re,im") {
                fail("expected header 'J,re,im'");
            }
            header = true;
            continue;
        }
        std::istringstream row(line);
        std::string a;
        std::string b;
        std::string c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
            fail("expected three comma-separated fields");
        }
        double j = 0.0;
        double re = 0.0;
        double im = 0.0;
        try {
            std::size_t pa = 0;
            std::size_t pb = 0;
            std::size_t pc = 0;
            j = std::stod(a, &pa);
            re = std::stod(b, &pb);
            im = std::stod(c, &pc);
            auto trailing = [](const std::string &s, std::size_t p) {
                return s.find_first_not_of(" \t", p) != std::string::npos;
            };
            if (trailing(a, pa) || trailing(b, pb) || trailing(c, pc)) {
                fail("malformed number");
            }
        } catch (const std::logic_error &) {
            fail("malformed number");
        }
        if (j != static_cast<double>(pw.s_elements.size())) {
            fail("J values must be contiguous from 0");
        }
        if (!std::isfinite(re) || !std::isfinite(im)) {
            fail("S-matrix element is not finite");
        }
        pw.s_elements.emplace_back(re, im);
    }
    if (!header) {
        throw InvalidArgument("partial waves: empty input");
    }
    if (pw.s_elements.empty()) {
        throw InvalidArgument("partial waves: no rows after header");
    }
    pw.validate();
    return pw;
}

} // namespace weakval
