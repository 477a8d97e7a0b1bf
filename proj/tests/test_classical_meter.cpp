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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "weakval/classical_meter.hpp"

using namespace weakval;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

HybridDistribution gaussian_w(double mu, double s, double h) {
    return HybridDistribution::sample(mu - 10 * s, mu + 10 * s,
                                      static_cast<std::size_t>(20 * s / h) + 1, [=](double f) {
                                          return std::exp(-0.5 * (f - mu) * (f - mu) / (s * s)) /
                                                 (s * std::sqrt(2 * pi));
                                      });
}

} // namespace

TEST_CASE("profile constants", "[classical-meter]") {
    auto g = ApparatusProfile::gaussian(3.0);
    CHECK_THAT(g.density_second_moment(), WithinRel(4.5, 1e-13));
    CHECK_THAT(g.amplitude_second_moment(), WithinRel(2.25, 1e-13));
    CHECK_THAT(g.density(0.0), WithinRel(1.0 / (3.0 * std::sqrt(pi)), 1e-13));
    CHECK_THAT(g.c_factor(), WithinAbs(0.5, 1e-10));
    CHECK_THROWS_AS(ApparatusProfile([](double z) { return std::exp(-(z - 1) * (z - 1)); }, 1.0,
                                     8.0, "shifted"),
                    InvalidArgument);
    CHECK_THROWS_AS(ApparatusProfile::gaussian(-1.0), InvalidArgument);
}

TEST_CASE("C factor of a non-Gaussian profile from z-space Parseval identities",
          "[classical-meter]") {
    // g(z) = 1 / cosh(z); transform-space integrals rewritten in z space:
    // C = int z^2 g g'' / int g^2 + int g'^2 int z^2 g^2 / (int g^2)^2
    auto shape = [](double z) { return 1.0 / std::cosh(z); };
    ApparatusProfile p(shape, 1.0, 40.0, "sech");
    auto r = numeric::composite_gauss_legendre(-40.0, 40.0, 200, 16);
    double g2 = 0, z2gg2 = 0, gp2 = 0, z2g2 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double z = r.nodes[i], w = r.weights[i];
        const double g = shape(z), t = std::tanh(z);
        const double gp = -t * g, gpp = g * (t * t - 1.0 / (std::cosh(z) * std::cosh(z)));
        g2 += w * g * g;
        z2gg2 += w * z * z * g * gpp;
        gp2 += w * gp * gp;
        z2g2 += w * z * z * g * g;
    }
    const double expect = z2gg2 / g2 + gp2 * z2g2 / (g2 * g2);
    CHECK_THAT(p.c_factor(), WithinRel(expect, 1e-7));
}

TEST_CASE("convolution preserves mass and mean, adds variance", "[classical-meter]") {
    auto w = gaussian_w(0.7, 0.4, 0.01);
    for (double alpha : {0.3, 1.0, 5.0}) {
        auto g = ApparatusProfile::gaussian(alpha);
        auto W = convolve_readings(w, g);
        auto mw = moments(w, 2);
        auto mW = moments(W, 2);
        CHECK_THAT(mW.norm.real(), WithinAbs(mw.norm.real(), 1e-12));
        CHECK_THAT(mW.mean().real(), WithinAbs(mw.mean().real(), 1e-9));
        CHECK_THAT(mW.raw_moments[1].real() - g.density_second_moment() -
                       mw.raw_moments[1].real(),
                   WithinAbs(0.0, 1e-8));
    }
}

TEST_CASE("convolution limits", "[classical-meter]") {
    auto w = gaussian_w(0.0, 1.0, 0.05);
    auto same = convolve_readings(w, ApparatusProfile::delta());
    CHECK(same.values() == w.values());

    auto g = ApparatusProfile::gaussian(2.0);
    auto W = convolve_readings(HybridDistribution::from_spikes({{1.3, cplx(1.0)}}), g);
    double worst = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        worst = std::max(worst, std::abs(W.values()[i].real() - g.density(W.abscissa(i) - 1.3)));
    }
    CHECK(worst < 1e-12);
    auto m = moments(W, 2);
    CHECK_THAT(m.mean().real(), WithinAbs(1.3, 1e-12));
    CHECK_THAT(m.variance.real(), WithinRel(2.0, 1e-10));
}

TEST_CASE("Fourier transform of W is the product of transforms", "[classical-meter]") {
    auto w = gaussian_w(0.2, 0.5, 0.02);
    auto g = ApparatusProfile::gaussian(1.5);
    auto W = convolve_readings(w, g);
    auto kernel = HybridDistribution::sample(-600 * 0.02, 600 * 0.02, 1201,
                                             [&](double f) { return g.density(f); });
    const double ksum = total_integral(kernel).real();
    for (double lambda : {0.0, 0.3, 1.1, 2.5}) {
        const cplx lhs = characteristic(W, lambda);
        const cplx rhs = characteristic(w, lambda) * characteristic(kernel, lambda) / ksum;
        CHECK(std::abs(lhs - rhs) < 1e-8);
    }
}

TEST_CASE("binomial and generating-function moments agree with quadrature",
          "[classical-meter]") {
    auto w = gaussian_w(0.5, 0.3, 0.005);
    auto g = ApparatusProfile::gaussian(0.8);
    auto W = convolve_readings(w, g);
    auto mw = moments(w, 4);
    auto mW = moments(W, 4);
    auto kern = HybridDistribution::sample(-g.half_width(), g.half_width(), 2049,
                                           [&](double f) { return g.density(f); });
    auto mg = moments(kern, 4);
    std::vector<double> gm{1.0}, wm{1.0};
    for (int n = 0; n < 4; ++n) {
        gm.push_back(mg.raw_moments[static_cast<std::size_t>(n)].real());
        wm.push_back(mw.raw_moments[static_cast<std::size_t>(n)].real());
    }
    for (int n = 1; n <= 4; ++n) {
        CHECK_THAT(binomial_moment(gm, wm, n),
                   WithinAbs(mW.raw_moments[static_cast<std::size_t>(n - 1)].real(), 1e-8));
    }
    // i^n d^n/dlambda^n <exp(-i lambda f)> at 0
    auto chi = [&](double l) { return characteristic(W, l); };
    const cplx d1 = numeric::richardson_derivative(chi, 0.0, 1e-3, 1);
    const cplx d2 = numeric::richardson_derivative(chi, 0.0, 1e-3, 2);
    CHECK_THAT((I * d1).real(), WithinAbs(mW.raw_moments[0].real(), 1e-8));
    CHECK_THAT((-d2).real(), WithinAbs(mW.raw_moments[1].real(), 1e-7));
}

TEST_CASE("noisy readings", "[classical-meter]") {
    auto spike = HybridDistribution::from_spikes({{1.0, cplx(1.0)}});
    auto e = estimate_from_noisy_readings(spike, ApparatusProfile::gaussian(10.0), 1000000, 42);
    // the pointer has standard deviation alpha / sqrt(2)
    CHECK_THAT(e.se_mean, WithinRel(10.0 / std::sqrt(2.0) / 1000.0, 0.01));
    CHECK(std::abs(e.mean - 1.0) < 3.0 * e.se_mean);
    CHECK(std::abs(e.second_moment - 1.0) < 3.0 * e.se_second_moment);

    auto w = sine_family(1.5, 2001);
    auto exact = moments(w, 2);
    const double sd = std::sqrt(exact.variance.real());
    auto d = estimate_from_noisy_readings(w, ApparatusProfile::delta(), 10000, 7);
    CHECK(std::abs(d.mean - exact.mean().real()) < 3.0 * sd / 100.0);

    CHECK_THROWS_AS(estimate_from_noisy_readings(sine_family(0.1, 101),
                                                 ApparatusProfile::gaussian(1.0), 10, 1),
                    InvalidArgument);
    // identical seeds reproduce identical estimates
    auto a = estimate_from_noisy_readings(w, ApparatusProfile::gaussian(2.0), 5000, 9);
    auto b = estimate_from_noisy_readings(w, ApparatusProfile::gaussian(2.0), 5000, 9);
    CHECK(a.mean == b.mean);
}

TEST_CASE("free-particle functionals", "[classical-meter]") {
    FreeParticleEnsemble e;
    e.t0 = 0.7;
    CHECK(functional_value(e, 2.0, -0.5) == Catch::Approx(-0.5 + 2.0 * 0.7));

    FreeParticleEnsemble dwell;
    dwell.observable = FreeParticleEnsemble::Observable::region_indicator;
    dwell.switching = FreeParticleEnsemble::Switching::constant;
    dwell.region_length = 2.0;
    dwell.total_time = 100.0;
    CHECK_THAT(functional_value(dwell, 0.5, -1.0), WithinRel(2.0 / 0.5, 1e-14));
    CHECK(functional_value(dwell, -0.5, -1.0) == 0.0);

    CHECK_THROWS_AS(functional_distribution(dwell, 50, {}, 1), InvalidArgument);
}

TEST_CASE("ensemble mean matches a quadrature oracle", "[classical-meter]") {
    FreeParticleEnsemble e;
    e.observable = FreeParticleEnsemble::Observable::region_indicator;
    e.switching = FreeParticleEnsemble::Switching::constant;
    e.region_length = 1.0;
    e.total_time = 6.0;
    e.p_mean = 0.8;
    e.p_sd = 0.2;
    e.x_mean = -1.0;
    e.x_sd = 0.3;
    auto s = functional_distribution(e, 200000, {0.0, 6.0, 60}, 2024);
    // <A(t')> = Prob(0 <= X + P t' <= L) with X + P t' Gaussian
    auto prob = [&](double t) {
        const double mu = e.x_mean + e.p_mean * t;
        const double sd = std::sqrt(e.x_sd * e.x_sd + e.p_sd * e.p_sd * t * t);
        auto cdf = [&](double y) { return 0.5 * std::erfc(-(y - mu) / (sd * std::sqrt(2.0))); };
        return cdf(e.region_length) - cdf(0.0);
    };
    auto r = numeric::composite_gauss_legendre(0.0, e.total_time, 40, 10);
    double oracle = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        oracle += r.weights[i] * prob(r.nodes[i]);
    }
    CHECK(std::abs(s.mean - oracle) < 3.0 * s.se_mean);
    double mass = 0.0;
    for (const auto &v : s.histogram.values()) {
        mass += v.real() * s.histogram.grid_step();
    }
    CHECK_THAT(mass, WithinAbs(1.0, 1e-12));
}
