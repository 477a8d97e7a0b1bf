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

// JSON loaders for systems, states, couplings and partial waves, plus a
// small deterministic CSV table writer.
//
// Complex numbers are written either as a bare number or as [re, im].
// Matrices are arrays of rows, each row an array of complex entries.

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakval/error.hpp"
#include "weakval/lam.hpp"
#include "weakval/quantum_core.hpp"

namespace weakval::io {

using json = nlohmann::json;

/// Reject keys outside `allowed`; catches typos in configs early.
inline void check_keys(const json &obj, std::initializer_list<const char *> allowed,
                       const std::string &where) {
    detail::require(obj.is_object(), where + ": expected an object");
    for (const auto &[key, _] : obj.items()) {
        bool ok = false;
        for (const char *a : allowed) {
            ok = ok || key == a;
        }
        detail::require(ok, where + ": unknown key '" + key + "'");
    }
}

inline double number(const json &j, const std::string &where) {
    detail::require(j.is_number(), where + ": expected a number");
    const double x = j.get<double>();
    detail::require(std::isfinite(x), where + ": must be finite");
    return x;
}

inline double number_or(const json &obj, const char *key, double fallback,
                        const std::string &where) {
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

inline std::vector<double> numbers(const json &j, const std::string &where) {
    detail::require(j.is_array(), where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline cplx complex(const json &j, const std::string &where) {
    if (j.is_number()) {
        return number(j, where);
    }
    detail::require(j.is_array() && j.size() == 2, where + ": expected a number or [re, im]");
    return {number(j[0], where + ".re"), number(j[1], where + ".im")};
}

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline Vector vector(const json &j, const std::string &where) {
    detail::require(j.is_array() && !j.empty(), where + ": expected a non-empty array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = complex(j[i], where + "[" + std::to_string(i) + "]");
    }
    return v;
}

/// A state is a ray: it is normalised on load.
inline Vector state(const json &j, const std::string &where) {
    Vector v = vector(j, where);
    detail::require(v.norm() > 0.0, where + ": state vector is zero");
    return v / v.norm();
}

inline Matrix matrix(const json &j, const std::string &where) {
    detail::require(j.is_array() && !j.empty(), where + ": expected an array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto &row = j[static_cast<std::size_t>(r)];
        const std::string rw = where + "[" + std::to_string(r) + "]";
        detail::require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n,
                        rw + ": rows must have " + std::to_string(n) + " entries");
        for (Eigen::Index c = 0; c < n; ++c) {
            m(r, c) = complex(row[static_cast<std::size_t>(c)], rw + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

inline Coupling coupling(const json &j, const std::string &where) {
    check_keys(j, {"type", "t0"}, where);
    detail::require(j.contains("type") && j.at("type").is_string(), where + ".type: missing");
    const auto type = j.at("type").get<std::string>();
    if (type == "impulsive") {
        detail::require(j.contains("t0"), where + ".t0: missing");
        return Impulsive{number(j.at("t0"), where + ".t0")};
    }
    detail::require(type == "window", where + ".type: expected 'impulsive' or 'window'");
    detail::require(!j.contains("t0"), where + ".t0: only for impulsive coupling");
    return Window{};
}

/// {"hamiltonian": M, "observable": M}
inline FiniteSystem system(const json &j, const std::string &where) {
    check_keys(j, {"hamiltonian", "observable"}, where);
    detail::require(j.contains("hamiltonian") && j.contains("observable"),
                    where + ": needs 'hamiltonian' and 'observable'");
    return FiniteSystem(matrix(j.at("hamiltonian"), where + ".hamiltonian"),
                        matrix(j.at("observable"), where + ".observable"));
}

/// {"psi0": v, "psi1": v (optional), "time": t, "coupling": {...}}
inline TransitionSpec transition(const json &j, const FiniteSystem &sys, const std::string &where) {
    check_keys(j, {"psi0", "psi1", "time", "coupling"}, where);
    detail::require(j.contains("psi0"), where + ".psi0: missing");
    TransitionSpec spec;
    spec.psi0 = state(j.at("psi0"), where + ".psi0");
    if (j.contains("psi1")) {
        spec.psi1 = state(j.at("psi1"), where + ".psi1");
    }
    spec.total_time = number_or(j, "time", 1.0, where);
    if (j.contains("coupling")) {
        spec.coupling = coupling(j.at("coupling"), where + ".coupling");
    }
    spec.validate(sys);
    return spec;
}

/// {"energy": E, "k": k, "s_elements": [[re, im], ...], "prefactor": z (optional)}
inline PartialWaveSet partial_waves(const json &j, const std::string &where) {
    check_keys(j, {"energy", "k", "s_elements", "prefactor"}, where);
    detail::require(j.contains("k") && j.contains("s_elements"),
                    where + ": needs 'k' and 's_elements'");
    PartialWaveSet pw;
    pw.energy = number_or(j, "energy", 0.0, where);
    pw.k = number(j.at("k"), where + ".k");
    const auto &s = j.at("s_elements");
    detail::require(s.is_array(), where + ".s_elements: expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
        pw.s_elements.push_back(complex(s[i], where + ".s_elements[" + std::to_string(i) + "]"));
    }
    if (j.contains("prefactor")) {
        pw.prefactor = complex(j.at("prefactor"), where + ".prefactor");
    }
    pw.validate();
    return pw;
}

inline json parse_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

/// Partial waves from `.csv` (header J,re,im; k supplied) or `.json`.
inline PartialWaveSet ingest_partial_waves(const std::filesystem::path &path, double k = 1.0,
                                           double energy = 0.0) {
    if (path.extension() == ".json") {
        return partial_waves(parse_file(path), path.string());
    }
    std::ifstream in(path);
    detail::require(static_cast<bool>(in), "cannot open " + path.string());
    return read_partial_waves_csv(in, k, energy);
}

/// Shortest round-trip decimal representation; "." separator regardless of locale.
inline std::string format(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        detail::require(row.size() == header.size(), "csv: row width differs from header");
        rows.push_back(std::move(row));
    }
};

inline void write_csv(std::ostream &os, const CsvTable &t) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        os << (i ? "," : "") << t.header[i];
    }
    os << '\n';
    for (const auto &r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            os << (i ? "," : "") << format(r[i]);
        }
        os << '\n';
    }
}

} // namespace weakval::io
