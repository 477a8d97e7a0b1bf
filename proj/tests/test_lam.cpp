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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "weakval/lam.hpp"

using namespace weakval;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

PartialWaveSet bundled() {
    std::ifstream in(std::string(WEAKVAL_DATA_DIR) + "/fig5_partial_waves.csv");
    REQUIRE(in);
    return read_partial_waves_csv(in);
}

double deg(double d) { return d * pi / 180.0; }

} // namespace

TEST_CASE("partial-wave amplitude", "[lam]") {
    PartialWaveSet s{.k = 2.0, .s_elements = {cplx(1.0)}};
    CHECK(std::abs(amplitude(s, 0.3) - amplitude(s, 2.9)) < 1e-15);
    CHECK(std::abs(amplitude(s, 1.0) - 0.5 / std::sqrt(I * 2.0)) < 1e-15);

    PartialWaveSet two{.k = 1.0, .s_elements = {cplx(1.0), cplx(1.0)}, .prefactor = cplx(1.0)};
    for (double t : {0.2, 1.0, 2.5}) {
        CHECK_THAT(amplitude(two, t).real(), WithinAbs(0.5 + 1.5 * std::cos(t), 1e-14));
    }
    const double zero = std::acos(-1.0 / 3.0);
    CHECK(std::abs(amplitude(two, zero)) < 1e-15);
    CHECK_THROWS_AS(lam(two, zero), DegenerateNormalization);

    // global phase leaves the cross-section alone
    auto pw = bundled();
    auto rotated = pw;
    for (auto &x : rotated.s_elements) {
        x *= std::polar(1.0, 0.77);
    }
    for (double t = 0.1; t < 3.1; t += 0.2) {
        CHECK_THAT(differential_cross_section(rotated, t),
                   WithinRel(differential_cross_section(pw, t), 1e-12));
    }
    CHECK_THROWS_AS(amplitude(pw, 0.0), InvalidArgument);
    CHECK_THROWS_AS(amplitude(PartialWaveSet{.k = -1.0, .s_elements = {1.0}}, 1.0),
                    InvalidArgument);
}

TEST_CASE("local angular momentum", "[lam]") {
    for (double big_l : {0.0, 7.3, -12.0}) {
        auto ramp = [big_l](double t) { return std::polar(2.0, big_l * t); };
        for (double t : {0.3, 1.4, 2.8}) {
            CHECK_THAT(lam(ramp, t), WithinAbs(big_l, 1e-8));
        }
    }
    // one wave: theta-independent phase
    PartialWaveSet one{.s_elements = {0.0, 0.0, 0.0, 0.0, 0.0, std::polar(0.8, 1.1)}};
    for (double t : {0.2, 0.9, 2.0}) {
        CHECK_THAT(lam(one, t), WithinAbs(0.0, 1e-12));
    }
    // a e^{i l1 t} + b e^{i l2 t}
    const double a = 1.0;
    const double b = 0.6;
    const double l1 = 4.0;
    const double l2 = -6.0;
    auto pair = [&](double t) { return a * std::polar(1.0, l1 * t) + b * std::polar(1.0, l2 * t); };
    for (double t = 0.1; t < 3.1; t += 0.25) {
        const double c = std::cos((l1 - l2) * t);
        const double expect =
            (a * a * l1 + b * b * l2 + a * b * (l1 + l2) * c) / (a * a + b * b + 2 * a * b * c);
        CHECK_THAT(lam(pair, t), WithinAbs(expect, 1e-6));
    }
    // Legendre-derivative recurrence against the phase difference
    auto pw = bundled();
    for (double t = 0.1; t < 3.05; t += 0.05) {
        auto f = [&](double x) { return amplitude(pw, x); };
        CHECK_THAT(lam(pw, t), WithinAbs(lam(f, t), 1e-5 * std::max(1.0, std::abs(lam(pw, t)))));
    }
}

TEST_CASE("Fourier coefficients by Filon quadrature", "[lam]") {
    // f = e^{it}: c_L = pi^-1 int_0^pi e^{i(1-L)t} dt = 2i / (pi (1 - L))
    LamOptions opt;
    opt.filter_strength = 0.0;
    opt.l_max = 400;
    LamSpectrum sp([](double t) { return std::polar(1.0, t); }, opt);
    for (std::size_t i = 0; i < sp.modes().size(); ++i) {
        const int l = sp.modes()[i];
        const cplx expect = 2.0 * I / (pi * (1.0 - l));
        CHECK(std::abs(sp.coefficients()[i] - expect) < 1e-12);
    }
}

TEST_CASE("LAM decomposition", "[lam]") {
    SECTION("single even mode") {
        auto mode = [](double t) { return std::polar(1.5, 6.0 * t); };
        auto d = decompose(mode, 1.1);
        for (std::size_t i = 0; i < d.l.size(); ++i) {
            if (d.l[i] == 6) {
                CHECK_THAT(d.w[i], WithinAbs(1.0, 1e-10));
                CHECK(std::abs(d.phi[i] - mode(1.1)) < 1e-10);
            } else {
                CHECK(std::abs(d.w[i]) < 1e-10);
            }
        }
        CHECK_THAT(d.lam, WithinAbs(6.0, 1e-8));
    }
    SECTION("bundled thirteen-wave set") {
        auto pw = bundled();
        LamSpectrum sp(pw);
        for (double t = 0.02 * pi; t <= 0.98 * pi; t += 0.05) {
            auto d = sp.at(t, amplitude(pw, t));
            CHECK(d.reconstruction_error < 1e-6);
            CHECK_THAT(d.weight_sum(), WithinAbs(1.0, 1e-6));
            CHECK_THAT(d.lam, WithinAbs(lam(pw, t), 1e-4));
        }
        // the deep minimum near 50 degrees: local DCS minimum, large LAM
        // excursion and a sign-changing weight distribution
        double best = deg(40.0);
        for (double t = deg(40.0); t <= deg(60.0); t += deg(0.05)) {
            if (differential_cross_section(pw, t) < differential_cross_section(pw, best)) {
                best = t;
            }
        }
        CHECK(best > deg(45.0));
        CHECK(best < deg(55.0));
        CHECK(differential_cross_section(pw, best) < 1e-3 * differential_cross_section(pw, 0.05));
        auto d = sp.at(best, amplitude(pw, best));
        CHECK(*std::min_element(d.w.begin(), d.w.end()) < -1.0);
        CHECK_THAT(d.weight_sum(), WithinAbs(1.0, 1e-6));
        CHECK(std::abs(lam(pw, best)) > 3.0 * std::abs(lam(pw, deg(30.0))));
    }
    SECTION("two-wave destructive interference") {
        PartialWaveSet two{.s_elements = {cplx(1.0), cplx(1.0)}};
        auto d = decompose(two, std::acos(-1.0 / 3.0) + 0.01);
        CHECK(*std::min_element(d.w.begin(), d.w.end()) < 0.0);
        CHECK_THAT(d.weight_sum(), WithinAbs(1.0, 1e-6));
        CHECK_THAT(d.lam, WithinAbs(lam(two, d.theta), 1e-4));
    }
    SECTION("prefactor invariance") {
        auto pw = bundled();
        auto scaled = pw;
        scaled.prefactor = cplx(-3.0, 0.4);
        auto a = decompose(pw, 1.3);
        auto b = decompose(scaled, 1.3);
        CHECK_THAT(lam(scaled, 1.3), WithinAbs(lam(pw, 1.3), 1e-10));
        for (std::size_t i = 0; i < a.w.size(); ++i) {
            CHECK(std::abs(a.w[i] - b.w[i]) < 1e-10);
        }
    }
    SECTION("errors") {
        auto pw = bundled();
        CHECK_THROWS_AS(decompose(pw, 1.0, {.l_max = 34}), PreconditionError);
        CHECK_THROWS_AS(decompose(pw, 1.0, {.l_max = 33}), InvalidArgument);
        CHECK_THROWS_AS(decompose(pw, 0.01), InvalidArgument);
    }
}

TEST_CASE("partial-wave CSV ingest", "[lam]") {
    auto pw = bundled();
    CHECK(pw.j_max() == 12);
    CHECK(pw.s_elements.size() == 13);

    std::istringstream empty("");
    CHECK_THROWS_AS(read_partial_waves_csv(empty), InvalidArgument);
    std::istringstream gap("J,re,im\n0,1,0\n2,1,0\n");
    try {
        (void)read_partial_waves_csv(gap);
        FAIL("accepted non-contiguous J");
    } catch (const InvalidArgument &e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream nan("J,re,im\n0,nan,0\n");
    CHECK_THROWS_AS(read_partial_waves_csv(nan), InvalidArgument);
    std::istringstream junk("J,re,im\n0,1x,0\n");
    CHECK_THROWS_AS(read_partial_waves_csv(junk), InvalidArgument);
    std::istringstream noheader("0,1,0\n");
    CHECK_THROWS_AS(read_partial_waves_csv(noheader), InvalidArgument);
    CHECK_THROWS_AS(read_partial_waves_csv(empty, -1.0), InvalidArgument);
}
