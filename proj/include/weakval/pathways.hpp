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

// Interfering versus exclusive alternatives. Amplitudes of paths that the
// measurement does not distinguish add; probabilities of distinguished
// groups add. Path indices are zero-based.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "weakval/error.hpp"
#include "weakval/numeric.hpp"
#include "weakval/quantum_core.hpp"

namespace weakval {

struct PathAmplitudeSet {
    std::vector<cplx> amplitudes;
    std::vector<std::string> labels;

    [[nodiscard]] std::size_t size() const { return amplitudes.size(); }

    void validate() const {
        detail::require(!amplitudes.empty(), "paths: need at least one amplitude");
        detail::require(labels.empty() || labels.size() == amplitudes.size(),
                        "paths: one label per amplitude");
        bool any = false;
        for (const auto &a : amplitudes) {
            detail::require(std::isfinite(a.real()) && std::isfinite(a.imag()),
                            "paths: amplitudes must be finite");
            any = any || std::abs(a) > 0.0;
        }
        detail::require(any, "paths: all amplitudes vanish");
    }
};

/// Disjoint groups covering 0..d-1.
struct WatchPartition {
    std::vector<std::vector<std::size_t>> groups;

    void validate(std::size_t d) const {
        std::vector<int> seen(d, 0);
        for (const auto &g : groups) {
            detail::require(!g.empty(), "partition: empty group");
            for (std::size_t i : g) {
                detail::require(i < d, "partition: path index out of range");
                detail::require(seen[i]++ == 0, "partition: groups overlap");
            }
        }
        for (std::size_t i = 0; i < d; ++i) {
            detail::require(seen[i] == 1, "partition: path " + std::to_string(i) + " not covered");
        }
    }
};

/// Watch the listed paths individually; everything else stays unresolved.
[[nodiscard]] inline WatchPartition watch(std::size_t d, const std::vector<std::size_t> &watched) {
    WatchPartition p;
    std::vector<bool> taken(d, false);
    for (std::size_t i : watched) {
        detail::require(i < d, "watch: path index out of range");
        detail::require(!taken[i], "watch: path listed twice");
        taken[i] = true;
        p.groups.push_back({i});
    }
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < d; ++i) {
        if (!taken[i]) {
            rest.push_back(i);
        }
    }
    if (!rest.empty()) {
        p.groups.push_back(std::move(rest));
    }
    return p;
}

/// Degenerate measurement: group eigenvectors sharing an eigenvalue.
[[nodiscard]] inline WatchPartition partition_by_eigenvalue(const std::vector<double> &values,
                                                            double tolerance = 1e-10) {
    WatchPartition p;
    std::vector<double> keys;
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::size_t g = 0;
        while (g < keys.size() && std::abs(keys[g] - values[i]) > tolerance) {
            ++g;
        }
        if (g == keys.size()) {
            keys.push_back(values[i]);
            p.groups.emplace_back();
        }
        p.groups[g].push_back(i);
    }
    return p;
}

/// A(n) = <psi1|n><n|psi0> in the eigenbasis of the observable; H must vanish.
[[nodiscard]] inline PathAmplitudeSet path_amplitudes(const FiniteSystem &sys, const Vector &psi0,
                                                      const Vector &psi1) {
    detail::require(sys.hamiltonian_is_zero(),
                    "path_amplitudes: H != 0, paths are not constant; enumerate them with "
                    "virtual_path_amplitudes instead");
    detail::require(psi0.size() == sys.dim() && psi1.size() == sys.dim(),
                    "path_amplitudes: state dimension mismatch");
    PathAmplitudeSet out;
    const auto &v = sys.eigenvectors();
    for (Eigen::Index n = 0; n < sys.dim(); ++n) {
        out.amplitudes.push_back(psi1.dot(v.col(n)) * v.col(n).dot(psi0));
        out.labels.push_back("a=" + std::to_string(sys.eigenvalues()(n)));
    }
    out.validate();
    return out;
}

/// P(group) = |sum_{n in group} A(n)|^2 / sum_groups |sum A|^2.
[[nodiscard]] inline std::vector<double> watched_probabilities(const PathAmplitudeSet &set,
                                                               const WatchPartition &partition) {
    set.validate();
    partition.validate(set.size());
    std::vector<double> p;
    double total = 0.0;
    for (const auto &g : partition.groups) {
        cplx net = 0.0;
        for (std::size_t i : g) {
            net += set.amplitudes[i];
        }
        p.push_back(std::norm(net));
        total += p.back();
    }
    if (!(total > 0.0)) {
        throw DegenerateNormalization("watched_probabilities: the watching extinguishes the "
                                      "transition",
                                      total);
    }
    for (auto &x : p) {
        x /= total;
    }
    return p;
}

struct ShutterReport {
    std::size_t first = 0;
    std::size_t second = 0;
    double original_count = 0.0; // |sum A|^2
    double reduced_count = 0.0;  // with the pair's amplitudes zeroed
    bool count_unchanged = false;
    /// The pair's contributions cancel, so closing both leaves the net
    /// amplitude itself intact, not merely its modulus.
    bool cancels = false;
};

[[nodiscard]] inline ShutterReport shutter_sensitivity(const PathAmplitudeSet &set,
                                                       std::size_t first, std::size_t second,
                                                       double tolerance = 1e-12) {
    set.validate();
    detail::require(set.size() >= 3, "shutter_sensitivity: need at least three paths");
    detail::require(first < set.size() && second < set.size() && first != second,
                    "shutter_sensitivity: need two distinct valid paths");
    cplx all = 0.0;
    for (const auto &a : set.amplitudes) {
        all += a;
    }
    const cplx pair = set.amplitudes[first] + set.amplitudes[second];
    ShutterReport r{first, second, std::norm(all), std::norm(all - pair), false, false};
    const double scale = std::max(1.0, r.original_count);
    r.count_unchanged = std::abs(r.reduced_count - r.original_count) <= tolerance * scale;
    r.cancels = std::norm(pair) <= tolerance * scale;
    return r;
}

/**
 * Pairs that can be closed without affecting the detector: their amplitudes
 * cancel. A pair whose closure only flips the sign of the net amplitude also
 * keeps |sum A|^2 but is not reported here (see ShutterReport::count_unchanged).
 */
[[nodiscard]] inline std::vector<ShutterReport> count_preserving_pairs(const PathAmplitudeSet &set,
                                                                       double tolerance = 1e-12) {
    std::vector<ShutterReport> out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = i + 1; j < set.size(); ++j) {
            auto r = shutter_sensitivity(set, i, j, tolerance);
            if (r.cancels) {
                out.push_back(r);
            }
        }
    }
    return out;
}

/// The three-box states (|1> + |2> +- |3>) / sqrt 3 with A = diag(1, 2, 3).
struct ThreeBox {
    FiniteSystem system;
    Vector psi0;
    Vector psi1;
};

[[nodiscard]] inline ThreeBox three_box() {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << 1.0, 2.0, 3.0;
    Vector psi0(3);
    Vector psi1(3);
    psi0 << 1.0, 1.0, 1.0;
    psi1 << 1.0, 1.0, -1.0;
    return {FiniteSystem(Matrix::Zero(3, 3), a), psi0 / std::sqrt(3.0), psi1 / std::sqrt(3.0)};
}

} // namespace weakval
