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
 * Initial pointer profile of a meter.
 *
 * A profile is an even base shape g(z) plus a scale alpha. The classical
 * meter uses it as a probability density, G(f) = g(f/alpha)/(alpha int g);
 * the quantum meter uses it as an amplitude, G(f) = g(f/alpha), normalised so
 * that int G^2 = 1. alpha = 0 stands for an ideal (delta) pointer.
 */

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "error.hpp"
#include "numeric.hpp"

namespace weakval {

class ApparatusProfile {
  public:
    using Shape = std::function<double(double)>;

    /// g(z) = exp(-z^2), i.e. G(f) = exp(-f^2/alpha^2).
    static ApparatusProfile gaussian(double alpha) {
        return ApparatusProfile([](double z) { return std::exp(-z * z); }, alpha, 8.0,
                                "gaussian");
    }

    /// Ideal pointer.
    static ApparatusProfile delta() { return gaussian(0.0); }

    /**
     * @param base   even shape, negligible beyond |z| > z_cut
     * @param alpha  scale, >= 0
     */
    ApparatusProfile(Shape base, double alpha, double z_cut, std::string name)
        : base_(std::move(base)), alpha_(alpha), z_cut_(z_cut), name_(std::move(name)) {
        detail::require(std::isfinite(alpha_) && alpha_ >= 0.0, "alpha must be >= 0");
        detail::require(z_cut_ > 0.0, "z_cut must be positive");
        // evenness and rough shape checks on a probe grid
        for (int i = 0; i <= 64; ++i) {
            const double z = z_cut_ * i / 64.0;
            const double a = base_(z);
            const double b = base_(-z);
            detail::require(std::isfinite(a) && a >= 0.0,
                            "profile shape must be finite and non-negative");
            detail::require(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)),
                            "profile shape must be even");
        }
        auto rule = numeric::composite_gauss_legendre(-z_cut_, z_cut_, 64, 20);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double z = rule.nodes[i];
            const double g = base_(z);
            const double w = rule.weights[i];
            int_g_ += w * g;
            int_z2g_ += w * z * z * g;
            int_g2_ += w * g * g;
            int_z2g2_ += w * z * z * g * g;
        }
        detail::require(int_g_ > 0.0, "profile shape must have positive integral");
    }

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] bool is_delta() const noexcept { return alpha_ == 0.0; }
    [[nodiscard]] const std::string &name() const noexcept { return name_; }
    [[nodiscard]] double base(double z) const { return base_(z); }
    [[nodiscard]] double z_cut() const noexcept { return z_cut_; }
    [[nodiscard]] double half_width() const noexcept { return alpha_ * z_cut_; }

    [[nodiscard]] ApparatusProfile with_alpha(double alpha) const {
        return ApparatusProfile(base_, alpha, z_cut_, name_);
    }

    /// Normalised probability density (classical meter); alpha > 0.
    [[nodiscard]] double density(double f) const {
        return base_(f / alpha_) / (alpha_ * int_g_);
    }

    /// Pointer amplitude with int G^2 = 1 (quantum meter); alpha > 0.
    [[nodiscard]] double amplitude(double f) const {
        return base_(f / alpha_) / std::sqrt(alpha_ * int_g2_);
    }

    /// <f^2> of the density.
    [[nodiscard]] double density_second_moment() const {
        return alpha_ * alpha_ * int_z2g_ / int_g_;
    }

    /// alpha^2 int z^2 g^2 / int g^2, the leading term of the quantum spread.
    [[nodiscard]] double amplitude_second_moment() const {
        return alpha_ * alpha_ * int_z2g2_ / int_g2_;
    }

    /**
     * The shape factor C multiplying (Re f2 - |f|^2) in the large-alpha
     * expansion of the second moment. It is built from the Fourier transform
     * Gt(lambda) of the base shape and its second derivative, both obtained
     * here by quadrature, and does not depend on alpha.
     */
    [[nodiscard]] double c_factor() const {
        // Gt(l) = int cos(l z) g(z) dz, Gt''(l) = -int z^2 cos(l z) g(z) dz
        auto zr = numeric::composite_gauss_legendre(0.0, z_cut_, 64, 20);
        // the transform decays on a scale ~ 1/width; pick a generous lambda range
        const double lmax = 40.0 / std::sqrt(int_z2g_ / int_g_);
        auto lr = numeric::composite_gauss_legendre(0.0, lmax, 128, 20);
        double s_gg = 0.0;
        double s_l2gg = 0.0;
        double s_ggpp = 0.0;
        double s_l2ggpp = 0.0;
        for (std::size_t i = 0; i < lr.nodes.size(); ++i) {
            const double l = lr.nodes[i];
            double gt = 0.0;
            double gtpp = 0.0;
            for (std::size_t j = 0; j < zr.nodes.size(); ++j) {
                const double z = zr.nodes[j];
                const double c = 2.0 * zr.weights[j] * std::cos(l * z) * base_(z);
                gt += c;
                gtpp -= z * z * c;
            }
            const double w = lr.weights[i];
            s_gg += w * gt * gt;
            s_l2gg += w * l * l * gt * gt;
            s_ggpp += w * gt * gtpp;
            s_l2ggpp += w * l * l * gt * gtpp;
        }
        return s_l2ggpp / s_gg - (s_l2gg / s_gg) * (s_ggpp / s_gg);
    }

  private:
    Shape base_;
    double alpha_;
    double z_cut_;
    std::string name_;
    double int_g_ = 0.0;
    double int_z2g_ = 0.0;
    double int_g2_ = 0.0;
    double int_z2g2_ = 0.0;
};

} // namespace weakval
