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

// Quantum meter readings: pointer amplitude Psi = G * Phi, reading
// distribution rho = |Psi|^2, and averages over unobserved final states.

#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "weakval/apparatus.hpp"
#include "weakval/classical_meter.hpp"
#include "weakval/quantum_core.hpp"

namespace weakval {

struct ReadoutResult {
    HybridDistribution psi_f;   ///< pointer amplitude Psi(f)
    HybridDistribution rho_f;   ///< reading density |Psi(f)|^2, unnormalised
    double probability = 0.0;   ///< int rho: probability of the post-selection
    double mean = 0.0;
    double second_moment = 0.0;
    std::optional<cplx> weak1;  ///< f-bar, when the transition amplitude is non-zero
    std::optional<cplx> weak2;  ///< f-bar^2
};

namespace detail {

inline double largest_grid_step_for(const ApparatusProfile &g) { return g.alpha() / 8.0; }

/// Phi on a grid fine enough to resolve the pointer profile.
inline HybridDistribution resolved_amplitude(const FiniteSystem &sys, const TransitionSpec &spec,
                                             const ApparatusProfile &g) {
    auto phi = amplitude_distribution(sys, spec);
    if (!phi.has_smooth() || g.is_delta() || phi.grid_step() <= largest_grid_step_for(g)) {
        return phi;
    }
    const double step = largest_grid_step_for(g);
    const double span = std::max(sys.eigenvalues().maxCoeff() - sys.eigenvalues().minCoeff(), 1e-3);
    const auto points = numeric::next_power_of_two(
        std::max<std::size_t>(4096, static_cast<std::size_t>(std::ceil(4.0 * span / step))));
    if (points > (std::size_t{1} << 22)) {
        throw PreconditionError("pointer width too small for the Fourier grid of Phi");
    }
    return amplitude_distribution(sys, spec, {.normalize = false, .grid = {points, step}});
}

} // namespace detail

/**
 * Readings of a pointer with profile `g` after the post-selection in `spec`.
 * Moments come from direct quadrature over rho.
 */
[[nodiscard]] inline ReadoutResult read_meter(const FiniteSystem &sys, const TransitionSpec &spec,
                                              const ApparatusProfile &g) {
    detail::require(spec.psi1.has_value(), "read_meter needs a post-selected state");
    auto phi = detail::resolved_amplitude(sys, spec, g);
    ReadoutResult r;
    r.psi_f = phi;
    r.rho_f = phi;
    if (g.is_delta()) {
        detail::require(!phi.has_smooth(),
                        "an ideal (alpha = 0) pointer needs a discrete amplitude distribution");
        std::vector<Spike> rho;
        for (const auto &s : phi.spikes()) {
            rho.push_back({s.location, std::norm(s.weight)});
        }
        r.rho_f = HybridDistribution::from_spikes(std::move(rho));
    } else {
        r.psi_f = convolve_with_kernel(
            phi, [&g](double f) { return g.amplitude(f); }, g.half_width(),
            detail::largest_grid_step_for(g), false);
        r.rho_f = r.psi_f.transformed([](cplx z) { return cplx(std::norm(z), 0.0); });
    }
    // the scale of rho is set by |Phi|^2, not by the grid span
    double scale = 0.0;
    for (const auto &s : phi.spikes()) {
        scale += std::norm(s.weight);
    }
    if (phi.has_smooth()) {
        scale += std::norm(total_integral(phi.transformed([](cplx z) { return cplx(std::abs(z)); })));
    }
    auto m = moments(r.rho_f, 2, 1e-24 * std::max(scale, 1e-300));
    if (m.degenerate) {
        throw DegenerateNormalization("read_meter: post-selection has zero probability",
                                      std::abs(m.norm));
    }
    r.probability = m.norm.real();
    r.mean = m.raw_moments[0].real();
    r.second_moment = m.raw_moments[1].real();
    const cplx a0 = spec.psi1->dot(sys.propagator(spec.total_time) * spec.psi0);
    if (std::abs(a0) > 1e-12) {
        r.weak1 = weak_value(sys, spec, 1);
        r.weak2 = weak_value(sys, spec, 2);
    }
    return r;
}

/**
 * <f> from the lambda-space form: with F(lambda) = <psi1|U_lambda|psi0> and
 * Gt the transform of the pointer amplitude,
 * <f> = Re int Gt^2 conj(F) i F' dlambda / int Gt^2 |F|^2 dlambda.
 */
[[nodiscard]] inline double lambda_space_mean(const FiniteSystem &sys, const TransitionSpec &spec,
                                              const ApparatusProfile &g) {
    detail::require(spec.psi1.has_value(), "lambda_space_mean needs a post-selected state");
    detail::require(!g.is_delta(), "lambda_space_mean needs a pointer of finite width");
    auto zr = numeric::composite_gauss_legendre(0.0, g.z_cut(), 32, 16);
    double z2 = 0.0;
    double z0 = 0.0;
    for (std::size_t j = 0; j < zr.nodes.size(); ++j) {
        z0 += zr.weights[j] * g.base(zr.nodes[j]);
        z2 += zr.weights[j] * zr.nodes[j] * zr.nodes[j] * g.base(zr.nodes[j]);
    }
    // Gt(lambda) up to a constant: int cos(alpha lambda z) g(z) dz
    const double lmax = 40.0 / (g.alpha() * std::sqrt(z2 / z0));
    auto lr = numeric::composite_gauss_legendre(-lmax, lmax, 64, 16);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < lr.nodes.size(); ++i) {
        const double l = lr.nodes[i];
        double gt = 0.0;
        for (std::size_t j = 0; j < zr.nodes.size(); ++j) {
            gt += 2.0 * zr.weights[j] * std::cos(g.alpha() * l * zr.nodes[j]) * g.base(zr.nodes[j]);
        }
        const auto d = state_derivatives(sys, spec, 1, l);
        const cplx f0 = spec.psi1->dot(d[0]);
        const cplx f1 = spec.psi1->dot(d[1]);
        const double w = lr.weights[i] * gt * gt;
        num += w * (std::conj(f0) * I * f1).real();
        den += w * std::norm(f0);
    }
    return num / den;
}

struct AsymptoticMoments {
    cplx weak1;
    cplx weak2;
    double mean = 0.0;                  ///< Re f-bar
    double c_factor = 0.0;
    double predicted_second_moment = 0.0;
};

/// Leading large-alpha behaviour of the readings.
[[nodiscard]] inline AsymptoticMoments asymptotic_moments(const FiniteSystem &sys,
                                                          const TransitionSpec &spec,
                                                          const ApparatusProfile &g) {
    detail::require(g.alpha() >= 1.0, "asymptotic_moments: alpha must be >= 1");
    AsymptoticMoments a;
    a.weak1 = weak_value(sys, spec, 1);
    a.weak2 = weak_value(sys, spec, 2);
    a.mean = a.weak1.real();
    a.c_factor = g.c_factor();
    a.predicted_second_moment = g.amplitude_second_moment() +
                                a.c_factor * (a.weak2.real() - std::norm(a.weak1)) +
                                std::norm(a.weak1);
    return a;
}

struct ConvergenceReport {
    std::vector<double> alphas;
    std::vector<double> errors;  ///< |<f>(alpha) - Re f-bar|
    double slope = 0.0;          ///< least-squares log-log slope
};

/// Measured order at which the mean reading approaches Re f-bar.
[[nodiscard]] inline ConvergenceReport convergence_order(const FiniteSystem &sys,
                                                         const TransitionSpec &spec,
                                                         const ApparatusProfile &shape,
                                                         std::vector<double> alphas) {
    detail::require(alphas.size() >= 2, "convergence_order needs at least two alphas");
    ConvergenceReport r;
    r.alphas = std::move(alphas);
    const double target = weak_value(sys, spec, 1).real();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double a : r.alphas) {
        const double e = std::abs(read_meter(sys, spec, shape.with_alpha(a)).mean - target);
        r.errors.push_back(e);
        const double x = std::log(a);
        const double y = std::log(std::max(e, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(r.alphas.size());
    r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return r;
}

struct FinalStateAverage {
    Matrix basis;                               ///< columns |m>
    std::vector<double> probabilities;          ///< P_m
    HybridDistribution averaged_distribution;   ///< sum_m P_m Phi_m(f)
    HybridDistribution w1;
    HybridDistribution w2;
    cplx mean_weak1;                            ///< <f-bar>
    cplx mean_weak2;                            ///< <f-bar^2>
    double weighted_weak_square = 0.0;          ///< sum_m P_m |f-bar_m|^2
};

namespace detail {

inline void require_orthonormal_basis(const FiniteSystem &sys, const Matrix &basis) {
    require(basis.rows() == sys.dim() && basis.cols() == sys.dim(),
            "basis must hold dim orthonormal column vectors");
    const double defect = (basis.adjoint() * basis - Matrix::Identity(sys.dim(), sys.dim())).norm();
    if (!(defect <= 1e-10)) {
        throw InvalidArgument("basis is not orthonormal: Gram defect " + std::to_string(defect));
    }
}

} // namespace detail

/**
 * Averages over final states {|m>} that are not observed: each outcome
 * contributes its normalised amplitude distribution with weight P_m.
 */
[[nodiscard]] inline FinalStateAverage average_over_final_states(const FiniteSystem &sys,
                                                                 const TransitionSpec &spec,
                                                                 const Matrix &basis) {
    spec.validate(sys);
    detail::require_orthonormal_basis(sys, basis);
    const Vector free_final = sys.propagator(spec.total_time) * spec.psi0;
    const auto deriv = state_derivatives(sys, spec, 2);
    FinalStateAverage out{basis, {}, HybridDistribution::from_spikes({}), {}, {}, 0.0, 0.0, 0.0};
    bool first = true;
    for (Eigen::Index m = 0; m < sys.dim(); ++m) {
        const Vector bm = basis.col(m);
        const cplx c = bm.dot(free_final);
        out.probabilities.push_back(std::norm(c));
        // P_m Phi_m = conj(c_m) * (unnormalised Phi_m)
        auto sm = spec.with_final(bm);
        auto contribution = amplitude_distribution(sys, sm).scaled(std::conj(c));
        out.averaged_distribution =
            first ? contribution : out.averaged_distribution + contribution;
        first = false;
        const cplx d1 = bm.dot(deriv[1]);
        const cplx d2 = bm.dot(deriv[2]);
        out.mean_weak1 += std::conj(c) * I * d1;
        out.mean_weak2 -= std::conj(c) * d2;
        if (std::abs(c) > 1e-12) {
            out.weighted_weak_square += std::norm(c) * std::norm(I * d1 / c);
        }
    }
    auto split = decompose_complex(out.averaged_distribution);
    out.w1 = split.w1;
    out.w2 = split.w2;
    return out;
}

/// sum_m <psi0|U_lambda^-1|m><m|U_lambda|psi0>, identically one.
[[nodiscard]] inline cplx final_state_sum_rule(const FiniteSystem &sys, const TransitionSpec &spec,
                                               const Matrix &basis, double lambda) {
    detail::require_orthonormal_basis(sys, basis);
    const Vector v = evolve_lambda(sys, spec, lambda) * spec.psi0;
    cplx s = 0.0;
    for (Eigen::Index m = 0; m < sys.dim(); ++m) {
        const cplx a = basis.col(m).dot(v);
        s += std::conj(a) * a;
    }
    return s;
}

struct NoPostSelectionReadings {
    double predicted_mean = 0.0;            ///< Re <f-bar>
    double predicted_second_moment = 0.0;   ///< alpha^2 <z^2>_G + Re <f-bar^2>
    double direct_mean = 0.0;               ///< from sum_m |Psi_m(f)|^2
    double direct_second_moment = 0.0;
    double weighted_second_moment = 0.0;    ///< sum_m P_m <f^2>_m
};

/**
 * Readings when the final state is not observed, predicted from the averaged
 * weak values and obtained directly by summing the reading densities of the
 * individual outcomes.
 */
[[nodiscard]] inline NoPostSelectionReadings
no_post_selection_readings(const FiniteSystem &sys, const TransitionSpec &spec,
                           const Matrix &basis, const ApparatusProfile &g) {
    auto avg = average_over_final_states(sys, spec, basis);
    NoPostSelectionReadings r;
    r.predicted_mean = avg.mean_weak1.real();
    r.predicted_second_moment = g.amplitude_second_moment() + avg.mean_weak2.real();
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (Eigen::Index m = 0; m < sys.dim(); ++m) {
        const double p = avg.probabilities[static_cast<std::size_t>(m)];
        std::optional<ReadoutResult> read;
        try {
            read = read_meter(sys, spec.with_final(basis.col(m)), g);
        } catch (const DegenerateNormalization &) {
            continue;
        }
        const auto &rm = *read;
        mass += rm.probability;
        first += rm.probability * rm.mean;
        second += rm.probability * rm.second_moment;
        r.weighted_second_moment += p * rm.second_moment;
    }
    r.direct_mean = first / mass;
    r.direct_second_moment = second / mass;
    return r;
}

struct TimeIntegralMoments {
    cplx weak1;
    cplx weak2;
};

/**
 * Averaged weak values of the time-averaged observable as time integrals:
 * <f-bar> = (1/t) int <Psi(t')|A|Psi(t')> dt' and
 * <f-bar^2> = (2/t^2) int_0^t dt'' int_0^t'' dt' <Psi(t'')|A U(t''-t') A|Psi(t')>,
 * with <Psi(t)| expanded over the basis.
 */
[[nodiscard]] inline TimeIntegralMoments time_integral_moments(const FiniteSystem &sys,
                                                               const TransitionSpec &spec,
                                                               const Matrix &basis) {
    spec.validate(sys);
    detail::require(std::holds_alternative<Window>(spec.coupling),
                    "time_integral_moments needs window coupling");
    detail::require_orthonormal_basis(sys, basis);
    const double t = spec.total_time;
    const auto &a = sys.observable();
    // <Psi(t)| resolved over the basis, then mapped back to earlier times
    const Vector final_state = sys.propagator(t) * spec.psi0;
    Vector bra = Vector::Zero(sys.dim());
    for (Eigen::Index m = 0; m < sys.dim(); ++m) {
        bra += basis.col(m) * basis.col(m).dot(final_state);
    }
    auto rule = numeric::composite_gauss_legendre(0.0, t, 8, 12);
    TimeIntegralMoments out{0.0, 0.0};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t2 = rule.nodes[i];
        // <Psi(t2)| A as a ket: A U(t - t2)^dagger |final>
        const Vector left = a * (sys.propagator(t - t2).adjoint() * bra);
        const Vector here = sys.propagator(t2) * spec.psi0;
        out.weak1 += rule.weights[i] * left.dot(here) / t;
        auto inner = numeric::composite_gauss_legendre(0.0, t2, 8, 12);
        cplx s = 0.0;
        for (std::size_t j = 0; j < inner.nodes.size(); ++j) {
            const double t1 = inner.nodes[j];
            s += inner.weights[j] *
                 left.dot(sys.propagator(t2 - t1) * (a * (sys.propagator(t1) * spec.psi0)));
        }
        out.weak2 += rule.weights[i] * 2.0 * s / (t * t);
    }
    return out;
}

enum class SharpnessVerdict {
    genuinely_sharp,     ///< zero variance, single support point
    improper_sharpness,  ///< zero variance, broad support
    distributed,         ///< non-zero variance
    precondition_violated,
};

[[nodiscard]] inline std::string to_string(SharpnessVerdict v) {
    switch (v) {
    case SharpnessVerdict::genuinely_sharp:
        return "genuinely sharp";
    case SharpnessVerdict::improper_sharpness:
        return "improper sharpness";
    case SharpnessVerdict::distributed:
        return "distributed";
    case SharpnessVerdict::precondition_violated:
        return "precondition violated";
    }
    return "unknown";
}

struct ZeroVarianceReport {
    SharpnessVerdict verdict = SharpnessVerdict::precondition_violated;
    double max_modulus_defect = 0.0;  ///< max over the lambda grid of ||S| - 1|
    double mean = 0.0;                ///< Re[i S'/S] at 0
    double second_moment = 0.0;       ///< Re[-S''/S] at 0
    double relative_variance = 0.0;
    std::size_t support_points = 0;   ///< points above 1% of the peak of |Phi|
    bool broad_support = false;       ///< support_points >= the configured threshold
    std::string message;
};

struct ZeroVarianceOptions {
    double lambda_max = 5.0;
    std::size_t lambda_points = 101;
    double modulus_tolerance = 1e-8;
    double variance_tolerance = 1e-6;
    double support_fraction = 0.01;
    std::size_t broad_support = 10;
};

/**
 * Check whether a pure-phase characteristic function S(lambda) = exp(i phi)
 * yields vanishing improper variance, and whether the distribution behind it
 * is really concentrated at one point.
 */
[[nodiscard]] inline ZeroVarianceReport
zero_variance_detector(const std::function<cplx(double)> &s, const HybridDistribution &phi,
                       const ZeroVarianceOptions &opt = {}) {
    ZeroVarianceReport r;
    for (std::size_t i = 0; i < opt.lambda_points; ++i) {
        const double l = -opt.lambda_max + 2.0 * opt.lambda_max * static_cast<double>(i) /
                                               static_cast<double>(opt.lambda_points - 1);
        r.max_modulus_defect = std::max(r.max_modulus_defect, std::abs(std::abs(s(l)) - 1.0));
    }
    double peak = 0.0;
    for (const auto &sp : phi.spikes()) {
        peak = std::max(peak, std::abs(sp.weight));
    }
    peak = std::max(peak, phi.max_abs_value());
    for (const auto &sp : phi.spikes()) {
        r.support_points += std::abs(sp.weight) > opt.support_fraction * peak ? 1 : 0;
    }
    for (const auto &v : phi.values()) {
        r.support_points += std::abs(v) > opt.support_fraction * peak ? 1 : 0;
    }
    r.broad_support = r.support_points >= opt.broad_support;
    if (r.max_modulus_defect > opt.modulus_tolerance) {
        r.verdict = SharpnessVerdict::precondition_violated;
        r.message = "|S(lambda)| departs from 1 by " + std::to_string(r.max_modulus_defect);
        return r;
    }
    const cplx s0 = s(0.0);
    r.mean = (I * numeric::richardson_derivative(s, 0.0, 1e-4, 1) / s0).real();
    r.second_moment = (-numeric::richardson_derivative(s, 0.0, 1e-4, 2) / s0).real();
    r.relative_variance =
        std::abs(r.second_moment - r.mean * r.mean) / std::max(r.mean * r.mean, 1e-300);
    if (r.relative_variance > opt.variance_tolerance) {
        r.verdict = SharpnessVerdict::distributed;
        r.message = "variance does not vanish";
    } else if (r.support_points <= 1) {
        r.verdict = SharpnessVerdict::genuinely_sharp;
        r.message = "zero variance with a single support point";
    } else {
        r.verdict = SharpnessVerdict::improper_sharpness;
        r.message = "zero variance although the distribution has " +
                    std::to_string(r.support_points) + " support points";
    }
    return r;
}

/**
 * Detector for a finite system: the post-selected (normalised) transition
 * amplitude when psi1 is given, otherwise <U_0 psi0|U_lambda psi0> together
 * with the final-state-averaged distribution.
 */
[[nodiscard]] inline ZeroVarianceReport zero_variance_detector(const FiniteSystem &sys,
                                                               const TransitionSpec &spec,
                                                               const Matrix &basis,
                                                               const ZeroVarianceOptions &opt = {}) {
    spec.validate(sys);
    if (spec.psi1) {
        const cplx a0 = transition_amplitude(sys, spec, 0.0);
        if (std::abs(a0) <= 1e-12) {
            throw DegenerateNormalization("zero_variance_detector: vanishing amplitude",
                                          std::abs(a0));
        }
        auto phi = amplitude_distribution(sys, spec, {.normalize = true});
        return zero_variance_detector(
            [&](double l) { return transition_amplitude(sys, spec, l) / a0; }, phi, opt);
    }
    auto avg = average_over_final_states(sys, spec, basis);
    const Vector free_final = sys.propagator(spec.total_time) * spec.psi0;
    return zero_variance_detector(
        [&](double l) { return free_final.dot(evolve_lambda(sys, spec, l) * spec.psi0); },
        avg.averaged_distribution, opt);
}

/// Two-state example: psi0 ~ |1> + |2>, psi1 ~ |1> - (1 - eps)|2>, A = diag(1, 2), H = 0.
[[nodiscard]] inline std::pair<FiniteSystem, TransitionSpec> two_level_example(double eps) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 2.0;
    TransitionSpec spec;
    spec.psi0 = Vector::Ones(2) / std::sqrt(2.0);
    Vector p1(2);
    p1 << 1.0, -(1.0 - eps);
    spec.psi1 = p1 / p1.norm();
    spec.total_time = 1.0;
    spec.coupling = Impulsive{0.5};
    return {FiniteSystem(Matrix::Zero(2, 2), a), std::move(spec)};
}

/// Closed form of <f>(alpha, eps) for two_level_example with a Gaussian pointer.
[[nodiscard]] inline double two_level_mean_closed_form(double eps, double alpha) {
    const double u = 1.0 - eps;
    const double e = alpha > 0.0 ? std::exp(-1.0 / (2.0 * alpha * alpha)) : 0.0;
    return (1.0 + 2.0 * u * u - 3.0 * u * e) / (1.0 + u * u - 2.0 * u * e);
}

struct MeanSurfacePoint {
    double alpha;
    double epsilon;
    double mean_f;
};

/// <f>(alpha, eps) of the two-state example with a Gaussian pointer.
[[nodiscard]] inline std::vector<MeanSurfacePoint>
two_level_mean_surface(const std::vector<double> &alphas, const std::vector<double> &epsilons) {
    std::vector<MeanSurfacePoint> out;
    for (double a : alphas) {
        for (double e : epsilons) {
            auto [sys, spec] = two_level_example(e);
            out.push_back({a, e, read_meter(sys, spec, ApparatusProfile::gaussian(a)).mean});
        }
    }
    return out;
}

inline void write_mean_surface(std::ostream &os, const std::vector<MeanSurfacePoint> &pts) {
    os << "alpha,epsilon,mean_f\n";
    char buf[64];
    auto put = [&](double x) {
        auto res = std::to_chars(buf, buf + sizeof buf, x);
        os.write(buf, res.ptr - buf);
    };
    for (const auto &p : pts) {
        put(p.alpha);
        os << ',';
        put(p.epsilon);
        os << ',';
        put(p.mean_f);
        os << '\n';
    }
}

} // namespace weakval
