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
 * Finite-dimensional systems coupled to a von Neumann-like meter.
 *
 * The meter couples to an observable A either impulsively at a time t0 or
 * uniformly over [0, t] (unit-integral switching). Everything is built on
 * the lambda-dependent evolution operator U_lambda; the amplitude
 * distribution Phi(f) is its Fourier transform, and weak values are
 * normalised lambda-derivatives at lambda = 0.
 */

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "improper_dist.hpp"
#include "numeric.hpp"

namespace weakval {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace detail {

inline double hermitian_defect(const Matrix &m) {
    return (m - m.adjoint()).norm();
}

} // namespace detail

/// Hamiltonian and measured observable, both Hermitian.
class FiniteSystem {
  public:
    FiniteSystem(Matrix hamiltonian, Matrix observable)
        : h_(std::move(hamiltonian)), a_(std::move(observable)) {
        detail::require(h_.rows() >= 2 && h_.rows() == h_.cols(),
                        "hamiltonian must be square with dim >= 2");
        detail::require(a_.rows() == h_.rows() && a_.cols() == h_.cols(),
                        "observable and hamiltonian dimensions differ");
        detail::require(h_.allFinite() && a_.allFinite(), "matrices must be finite");
        detail::require(detail::hermitian_defect(h_) <= 1e-12 * std::max(1.0, h_.norm()),
                        "hamiltonian is not Hermitian");
        detail::require(detail::hermitian_defect(a_) <= 1e-12 * std::max(1.0, a_.norm()),
                        "observable is not Hermitian");
        // symmetrise away representation noise
        h_ = 0.5 * (h_ + h_.adjoint()).eval();
        a_ = 0.5 * (a_ + a_.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> ea(a_);
        a_values_ = ea.eigenvalues();
        a_vectors_ = ea.eigenvectors();
        Eigen::SelfAdjointEigenSolver<Matrix> eh(h_);
        h_values_ = eh.eigenvalues();
        h_vectors_ = eh.eigenvectors();
        const Matrix rebuilt = a_vectors_ * a_values_.cast<cplx>().asDiagonal() *
                               a_vectors_.adjoint();
        detail::require_numeric((rebuilt - a_).norm() <= 1e-10 * std::max(1.0, a_.norm()),
                                "observable eigendecomposition is inaccurate");
    }

    [[nodiscard]] Eigen::Index dim() const noexcept { return h_.rows(); }
    [[nodiscard]] const Matrix &hamiltonian() const noexcept { return h_; }
    [[nodiscard]] const Matrix &observable() const noexcept { return a_; }
    [[nodiscard]] const Eigen::VectorXd &eigenvalues() const noexcept { return a_values_; }
    [[nodiscard]] const Matrix &eigenvectors() const noexcept { return a_vectors_; }

    /// exp(-i H s) from the cached spectral decomposition.
    [[nodiscard]] Matrix propagator(double s) const {
        Vector phases(h_values_.size());
        for (Eigen::Index i = 0; i < phases.size(); ++i) {
            phases(i) = std::polar(1.0, -h_values_(i) * s);
        }
        return h_vectors_ * phases.asDiagonal() * h_vectors_.adjoint();
    }

    [[nodiscard]] bool hamiltonian_is_zero() const { return h_.norm() == 0.0; }

    [[nodiscard]] double commutator_norm() const { return (h_ * a_ - a_ * h_).norm(); }

    [[nodiscard]] bool commutes() const {
        return commutator_norm() <= 1e-12 * std::max(1.0, h_.norm() * a_.norm());
    }

  private:
    Matrix h_;
    Matrix a_;
    Eigen::VectorXd a_values_;
    Matrix a_vectors_;
    Eigen::VectorXd h_values_;
    Matrix h_vectors_;
};

/// Exponential of -i (generator) for a Hermitian generator.
[[nodiscard]] inline Matrix unitary_exp(const Matrix &hermitian_generator) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_generator);
    Vector phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::polar(1.0, -es.eigenvalues()(i));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct Impulsive {
    double t0 = 0.0;
};
struct Window {};
using Coupling = std::variant<Impulsive, Window>;

struct TransitionSpec {
    Vector psi0;
    std::optional<Vector> psi1;
    double total_time = 1.0;
    Coupling coupling = Window{};

    void validate(const FiniteSystem &sys) const {
        detail::require(psi0.size() == sys.dim(), "psi0 has the wrong dimension");
        detail::require(std::abs(psi0.norm() - 1.0) <= 1e-12, "psi0 must be normalised");
        if (psi1) {
            detail::require(psi1->size() == sys.dim(), "psi1 has the wrong dimension");
            detail::require(std::abs(psi1->norm() - 1.0) <= 1e-12, "psi1 must be normalised");
        }
        detail::require(std::isfinite(total_time) && total_time > 0.0,
                        "total_time must be positive");
        if (const auto *imp = std::get_if<Impulsive>(&coupling)) {
            detail::require(imp->t0 >= 0.0 && imp->t0 <= total_time,
                            "impulsive coupling time must lie in [0, t]");
        }
    }

    [[nodiscard]] bool impulsive() const { return std::holds_alternative<Impulsive>(coupling); }

    [[nodiscard]] TransitionSpec with_final(const Vector &final_state) const {
        auto s = *this;
        s.psi1 = final_state;
        return s;
    }
};

/// U_lambda for the chosen coupling.
[[nodiscard]] inline Matrix evolve_lambda(const FiniteSystem &sys, const TransitionSpec &spec,
                                          double lambda) {
    spec.validate(sys);
    const double t = spec.total_time;
    if (const auto *imp = std::get_if<Impulsive>(&spec.coupling)) {
        return sys.propagator(t - imp->t0) * unitary_exp(lambda * sys.observable()) *
               sys.propagator(imp->t0);
    }
    return unitary_exp(sys.hamiltonian() * t + lambda * sys.observable());
}

/**
 * The first `nmax` lambda-derivatives of U_lambda |psi0> at `lambda`:
 * result[n] = d^n/dlambda^n U_lambda |psi0>. Impulsive coupling is
 * differentiated in closed form; for the window the derivatives are read off
 * the exponential of a block upper-triangular (Toeplitz) matrix, whose
 * (0, n) block is (1/n!) d^n/dlambda^n exp(B + lambda C).
 */
[[nodiscard]] inline std::vector<Vector> state_derivatives(const FiniteSystem &sys,
                                                           const TransitionSpec &spec, int nmax,
                                                           double lambda = 0.0) {
    spec.validate(sys);
    detail::require(nmax >= 0, "state_derivatives: nmax must be >= 0");
    const auto d = sys.dim();
    const double t = spec.total_time;
    std::vector<Vector> out;
    if (const auto *imp = std::get_if<Impulsive>(&spec.coupling)) {
        Vector v = unitary_exp(lambda * sys.observable()) * (sys.propagator(imp->t0) * spec.psi0);
        const Matrix after = sys.propagator(t - imp->t0);
        const Matrix minus_i_a = cplx(0.0, -1.0) * sys.observable();
        for (int n = 0; n <= nmax; ++n) {
            out.push_back(after * v);
            v = minus_i_a * v;
        }
        return out;
    }
    const Matrix b = cplx(0.0, -1.0) * (sys.hamiltonian() * t + lambda * sys.observable());
    if (nmax == 0) {
        out.push_back(unitary_exp(sys.hamiltonian() * t + lambda * sys.observable()) * spec.psi0);
        return out;
    }
    const Matrix c = cplx(0.0, -1.0) * sys.observable();
    const auto blocks = static_cast<Eigen::Index>(nmax + 1);
    Matrix big = Matrix::Zero(blocks * d, blocks * d);
    for (Eigen::Index i = 0; i < blocks; ++i) {
        big.block(i * d, i * d, d, d) = b;
        if (i + 1 < blocks) {
            big.block(i * d, (i + 1) * d, d, d) = c;
        }
    }
    const Matrix e = big.exp();
    double factorial = 1.0;
    for (int n = 0; n <= nmax; ++n) {
        if (n > 0) {
            factorial *= n;
        }
        out.push_back(factorial * e.block(0, n * d, d, d) * spec.psi0);
    }
    return out;
}

/// <psi1| U_lambda |psi0>.
[[nodiscard]] inline cplx transition_amplitude(const FiniteSystem &sys, const TransitionSpec &spec,
                                               double lambda) {
    detail::require(spec.psi1.has_value(), "transition amplitude needs a post-selected state");
    return spec.psi1->dot(evolve_lambda(sys, spec, lambda) * spec.psi0);
}

struct FourierGridOptions {
    std::size_t points = 4096;  ///< power of two
    double f_step = 0.0;        ///< 0: chosen from the spectrum of A
};

/**
 * Smooth distribution Phi(f) = (2 pi)^-1 int exp(i f lambda) F(lambda)
 * dlambda on the f-grid centred at `f_centre`, by a centred DFT over
 * lambda in [-pi/df, pi/df). A super-Gaussian window exp(-(lambda/L)^8)
 * with L = half the lambda range tames the truncation; all its
 * derivatives up to order 7 vanish at lambda = 0, so low moments are kept.
 */
template <class F>
[[nodiscard]] HybridDistribution fourier_distribution(F &&characteristic, double f_centre,
                                                      double f_step, std::size_t points) {
    detail::require(numeric::is_power_of_two(points) && points >= 16,
                    "fourier grid size must be a power of two >= 16");
    detail::require(f_step > 0.0, "fourier grid step must be positive");
    const double lambda_max = pi / f_step;
    const double dl = 2.0 * lambda_max / static_cast<double>(points);
    const double l_win = 0.5 * lambda_max;
    std::vector<cplx> y(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double l = (static_cast<double>(j) - static_cast<double>(points / 2)) * dl;
        const double w = std::exp(-std::pow(l / l_win, 8));
        y[j] = w == 0.0 ? cplx{} : characteristic(l) * std::polar(1.0, f_centre * l) * w;
    }
    auto phi = numeric::centred_dft(y, dl, 0.0, +1);
    for (auto &v : phi) {
        v *= dl / (2.0 * pi);
    }
    const double start = f_centre - static_cast<double>(points / 2) * f_step;
    return HybridDistribution(start, f_step, std::move(phi));
}

struct AmplitudeOptions {
    bool normalize = false;  ///< divide by <psi1|U_0|psi0>
    FourierGridOptions grid{};
};

/**
 * Phi(f) for a post-selected transition, unnormalised so that its integral
 * equals <psi1| exp(-iHt) |psi0>.
 */
[[nodiscard]] inline HybridDistribution amplitude_distribution(const FiniteSystem &sys,
                                                               const TransitionSpec &spec,
                                                               const AmplitudeOptions &opt = {}) {
    spec.validate(sys);
    if (!spec.psi1) {
        throw InvalidArgument(
            "amplitude_distribution needs psi1; without post-selection use "
            "average_over_final_states");
    }
    const auto &psi1 = *spec.psi1;
    const double t = spec.total_time;
    cplx norm = 1.0;
    if (opt.normalize) {
        norm = psi1.dot(sys.propagator(t) * spec.psi0);
        if (std::abs(norm) <= 1e-12) {
            throw DegenerateNormalization("normalised Phi(f): vanishing transition amplitude",
                                          std::abs(norm));
        }
    }
    const auto &vec = sys.eigenvectors();
    const auto &val = sys.eigenvalues();
    std::vector<Spike> spikes;
    if (const auto *imp = std::get_if<Impulsive>(&spec.coupling)) {
        const Vector left = sys.propagator(t - imp->t0).adjoint() * psi1;
        const Vector right = sys.propagator(imp->t0) * spec.psi0;
        for (Eigen::Index k = 0; k < sys.dim(); ++k) {
            spikes.push_back({val(k), left.dot(vec.col(k)) * vec.col(k).dot(right) / norm});
        }
        return HybridDistribution::from_spikes(std::move(spikes));
    }
    if (sys.commutes()) {
        // U_lambda = exp(-iHt) exp(-i lambda A): each eigenspace of A shifts rigidly
        const Vector left = sys.propagator(t).adjoint() * psi1;
        for (Eigen::Index k = 0; k < sys.dim(); ++k) {
            spikes.push_back({val(k), left.dot(vec.col(k)) * vec.col(k).dot(spec.psi0) / norm});
        }
        return HybridDistribution::from_spikes(std::move(spikes));
    }
    const double lo = val.minCoeff();
    const double hi = val.maxCoeff();
    const double span = std::max(hi - lo, 1e-3);
    const double step =
        opt.grid.f_step > 0.0 ? opt.grid.f_step : 4.0 * span / static_cast<double>(opt.grid.points);
    return fourier_distribution(
        [&](double l) { return transition_amplitude(sys, spec, l) / norm; }, 0.5 * (lo + hi),
        step, opt.grid.points);
}

/**
 * Weak value of order n: i^n d^n <psi1|U_lambda|psi0> / <psi1|U_0|psi0>,
 * evaluated from exact lambda-derivatives.
 */
[[nodiscard]] inline cplx weak_value(const FiniteSystem &sys, const TransitionSpec &spec, int n) {
    detail::require(spec.psi1.has_value(), "weak_value needs a post-selected state");
    detail::require(n >= 1, "weak_value: order must be >= 1");
    const auto d = state_derivatives(sys, spec, n);
    const cplx a0 = spec.psi1->dot(d[0]);
    if (std::abs(a0) <= 1e-12) {
        throw DegenerateNormalization("weak value: vanishing transition amplitude", std::abs(a0));
    }
    return std::pow(I, n) * spec.psi1->dot(d[static_cast<std::size_t>(n)]) / a0;
}

struct VirtualPath {
    std::vector<int> labels;  ///< eigenvalue index at each time node
    cplx amplitude;
    double functional;        ///< value of the measured functional on the path
};

/**
 * Enumerate virtual paths through the eigenbasis of A on `slices` equal time
 * slices (labels at the slices+1 time nodes), with exact short-time
 * propagators, so the amplitudes sum to <psi1| exp(-iHt) |psi0>. When H = 0
 * only constant paths carry amplitude and only those are listed.
 */
[[nodiscard]] inline std::vector<VirtualPath> virtual_path_amplitudes(const FiniteSystem &sys,
                                                                      const TransitionSpec &spec,
                                                                      int slices,
                                                                      std::size_t cap = 10000) {
    spec.validate(sys);
    detail::require(spec.psi1.has_value(), "virtual paths need a post-selected state");
    detail::require(slices >= 1, "need at least one time slice");
    const auto d = static_cast<int>(sys.dim());
    const auto &vec = sys.eigenvectors();
    const auto &val = sys.eigenvalues();
    const auto nodes = static_cast<std::size_t>(slices) + 1;
    const double t = spec.total_time;

    // functional weights over the time nodes
    std::vector<double> weight(nodes, 0.0);
    if (const auto *imp = std::get_if<Impulsive>(&spec.coupling)) {
        const auto j = static_cast<std::size_t>(std::lround(imp->t0 / t * slices));
        weight[j] = 1.0;
    } else {
        for (std::size_t j = 0; j < nodes; ++j) {
            weight[j] = (j == 0 || j + 1 == nodes ? 0.5 : 1.0) / slices;
        }
    }
    auto functional = [&](const std::vector<int> &labels) {
        double f = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            f += weight[j] * val(labels[j]);
        }
        return f;
    };

    std::vector<VirtualPath> out;
    if (sys.hamiltonian_is_zero()) {
        for (int k = 0; k < d; ++k) {
            std::vector<int> labels(nodes, k);
            const cplx amp = spec.psi1->dot(vec.col(k)) * vec.col(k).dot(spec.psi0);
            out.push_back({labels, amp, functional(labels)});
        }
        return out;
    }
    double count = std::pow(static_cast<double>(d), static_cast<double>(nodes));
    if (count > static_cast<double>(cap)) {
        throw PreconditionError("virtual path count " + std::to_string(count) +
                                " exceeds the cap; use the Fourier route (amplitude_distribution)");
    }
    const Matrix step = vec.adjoint() * sys.propagator(t / slices) * vec;
    const Vector in = vec.adjoint() * spec.psi0;
    const Vector fin = vec.adjoint() * (*spec.psi1);
    std::vector<int> labels(nodes, 0);
    const auto total = static_cast<std::size_t>(count);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t r = idx;
        for (std::size_t j = 0; j < nodes; ++j) {
            labels[j] = static_cast<int>(r % static_cast<std::size_t>(d));
            r /= static_cast<std::size_t>(d);
        }
        cplx amp = in(labels[0]);
        for (std::size_t j = 1; j < nodes; ++j) {
            amp *= step(labels[j], labels[j - 1]);
        }
        amp *= std::conj(fin(labels[nodes - 1]));
        out.push_back({labels, amp, functional(labels)});
    }
    return out;
}

} // namespace weakval
