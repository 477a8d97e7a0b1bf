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

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "scenario.hpp"
#include "weakval/weakval.hpp"

namespace weakval::cli {
namespace {

using io::CsvTable;

std::string to_csv(const CsvTable &t) {
    std::ostringstream os;
    io::write_csv(os, t);
    return os.str();
}

double num(const json &p, const char *key, double fallback) {
    return io::number_or(p, key, fallback, std::string("params.") + key);
}

std::size_t count(const json &p, const char *key, std::size_t fallback, std::size_t min = 1) {
    if (!p.contains(key)) {
        return fallback;
    }
    const auto &v = p.at(key);
    detail::require(v.is_number_integer() && v.get<long long>() >= static_cast<long long>(min),
                    std::string("params.") + key + ": expected an integer >= " +
                        std::to_string(min));
    return static_cast<std::size_t>(v.get<long long>());
}

std::vector<double> list(const json &p, const char *key, std::vector<double> fallback) {
    if (!p.contains(key)) {
        return fallback;
    }
    auto v = io::numbers(p.at(key), std::string("params.") + key);
    detail::require(!v.empty(), std::string("params.") + key + ": must not be empty");
    return v;
}

/// {"from": a, "to": b, "count": n} -> n evenly spaced points.
std::vector<double> range(const json &p, const char *key, double from, double to, std::size_t n) {
    if (p.contains(key)) {
        const auto &r = p.at(key);
        const std::string where = std::string("params.") + key;
        io::check_keys(r, {"from", "to", "count"}, where);
        from = io::number_or(r, "from", from, where);
        to = io::number_or(r, "to", to, where);
        n = count(r, "count", n, 1);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(n == 1 ? from : from + (to - from) * static_cast<double>(i) / (n - 1.0));
    }
    return out;
}

// ----------------------------------------------------------------- dist

struct DistParams {
    std::vector<double> epsilons;
    std::size_t points;
    std::size_t csv_points;
    std::vector<std::pair<double, double>> pairs;
};

DistParams dist_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"epsilons", "points", "csv_points", "pairs"}, "params");
    DistParams d{list(p, "epsilons", {0.05, 0.1, 0.5, 1.5, -0.3}),
                 count(p, "points", (std::size_t{1} << 18) + 1, 3),
                 count(p, "csv_points", 201, 2),
                 {}};
    if (p.contains("pairs")) {
        detail::require(p.at("pairs").is_array(), "params.pairs: expected an array of pairs");
        for (const auto &e : p.at("pairs")) {
            auto v = io::numbers(e, "params.pairs[]");
            detail::require(v.size() == 2, "params.pairs[]: expected [eps1, eps2]");
            d.pairs.emplace_back(v[0], v[1]);
        }
    } else {
        d.pairs = {{0.05, 0.05}, {2.0, 2.0}, {0.3, -0.1}, {1.0, 0.2}, {-0.4, 0.7}};
    }
    return d;
}

struct DistNumbers {
    std::vector<std::array<double, 4>> moments; // norm, mean, second, variance
    std::vector<double> pair_means;
    double variance_root = 0.0;
};

DistNumbers dist_compute(const DistParams &d) {
    DistNumbers out;
    for (double e : d.epsilons) {
        auto m = moments(sine_family(e, d.points), 2);
        if (m.degenerate) {
            throw DegenerateNormalization("dist: epsilon " + io::format(e) +
                                              " gives a vanishing normalisation",
                                          std::abs(m.norm));
        }
        out.moments.push_back({m.norm.real(), m.mean().real(), m.raw_moments[1].real(),
                               m.variance.real()});
    }
    for (auto [e1, e2] : d.pairs) {
        auto split = decompose_complex(sine_family(e1, d.points) +
                                       sine_family(e2, d.points).scaled(I));
        out.pair_means.push_back(raw_integral_moment(split.w1, 1).real());
    }
    auto locus = variance_zero_locus([&](double e) { return sine_family(e, d.points); }, 0.1, 1.0,
                                     1e-10, 4);
    detail::require_numeric(locus.roots.size() == 1, "dist: expected one variance zero in [0.1, 1]");
    out.variance_root = locus.roots[0];
    return out;
}

RunResult dist_run(const Scenario &s) {
    const auto d = dist_params(s);
    const auto n = dist_compute(d);
    RunResult r;
    CsvTable m{{"epsilon", "norm", "mean", "second_moment", "variance"}, {}};
    for (std::size_t i = 0; i < d.epsilons.size(); ++i) {
        const auto &x = n.moments[i];
        m.add({d.epsilons[i], x[0], x[1], x[2], x[3]});
    }
    r.files["moments.csv"] = to_csv(m);
    CsvTable rho{{"epsilon", "f", "rho"}, {}};
    for (double e : d.epsilons) {
        for (std::size_t i = 0; i < d.csv_points; ++i) {
            const double f = static_cast<double>(i) / (d.csv_points - 1.0);
            rho.add({e, f, std::sin(2.0 * pi * f) + e});
        }
    }
    r.files["rho.csv"] = to_csv(rho);
    CsvTable c{{"epsilon1", "epsilon2", "mean_w1"}, {}};
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
        c.add({d.pairs[i].first, d.pairs[i].second, n.pair_means[i]});
    }
    r.files["complex_means.csv"] = to_csv(c);
    r.summary["variance_zero_epsilon"] = n.variance_root;
    return r;
}

std::vector<Check> dist_verify(const Scenario &s) {
    const auto d = dist_params(s);
    const auto n = dist_compute(d);
    std::vector<Check> out;
    for (std::size_t i = 0; i < d.epsilons.size(); ++i) {
        const double e = d.epsilons[i];
        const std::string tag = "eps=" + io::format(e);
        out.push_back({"norm " + tag, n.moments[i][0], e, 1e-9});
        out.push_back({"mean " + tag, n.moments[i][1], 0.5 - 1.0 / (2.0 * pi * e), 1e-9});
        out.push_back({"second moment " + tag, n.moments[i][2], 1.0 / 3.0 - 1.0 / (2.0 * pi * e),
                       1e-9});
    }
    out.push_back({"variance zero at sqrt(3)/pi", n.variance_root, std::sqrt(3.0) / pi, 1e-8});
    for (std::size_t i = 0; i < d.pairs.size(); ++i) {
        auto [e1, e2] = d.pairs[i];
        out.push_back({"complex mean eps=(" + io::format(e1) + "," + io::format(e2) + ")",
                       n.pair_means[i], 0.5 - (e1 + e2) / (2.0 * pi * (e1 * e1 + e2 * e2)),
                       1e-8});
    }
    return out;
}

// ------------------------------------------------------------ classical

struct ClassicalParams {
    double epsilon;
    std::size_t points;
    std::vector<double> alphas;
    double delta;
    double confidence;
    std::size_t reps;
};

ClassicalParams classical_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"epsilon", "points", "alphas", "delta", "confidence", "reps"}, "params");
    ClassicalParams c{num(p, "epsilon", 1.5),   count(p, "points", 1025, 3),
                      list(p, "alphas", {5.0, 10.0, 20.0, 40.0}),
                      num(p, "delta", 0.05),    num(p, "confidence", 0.95),
                      count(p, "reps", 100, 10)};
    detail::require(c.epsilon >= 1.0, "params.epsilon: w must be a proper distribution (>= 1)");
    for (double a : c.alphas) {
        detail::require(a > 0.0, "params.alphas: must be positive");
    }
    return c;
}

HybridDistribution classical_w(const ClassicalParams &c) {
    return sine_family(c.epsilon, c.points).scaled(1.0 / c.epsilon);
}

struct ClassicalQuadrature {
    double alpha, mean_w, mean_reading, var_w, var_reading, var_g;
};

std::vector<ClassicalQuadrature> classical_quadrature(const ClassicalParams &c) {
    const auto w = classical_w(c);
    const auto mw = moments(w, 2);
    std::vector<ClassicalQuadrature> out;
    for (double a : c.alphas) {
        const auto g = ApparatusProfile::gaussian(a);
        const auto mW = moments(convolve_readings(w, g), 2);
        out.push_back({a, mw.mean().real(), mW.mean().real(), mw.variance.real(),
                       mW.variance.real(), g.density_second_moment()});
    }
    return out;
}

// `run` records the checks in its manifest; keep the Monte-Carlo study to one pass per process.
const RequiredSamplesStudy &classical_study(const ClassicalParams &c, std::uint64_t seed) {
    static std::map<std::string, RequiredSamplesStudy> cache;
    std::ostringstream key;
    key << std::hexfloat << c.epsilon << ' ' << c.points << ' ' << c.delta << ' ' << c.confidence
        << ' ' << c.reps << ' ' << seed;
    for (double a : c.alphas) {
        key << ' ' << a;
    }
    auto it = cache.find(key.str());
    if (it == cache.end()) {
        it = cache
                 .emplace(key.str(),
                          required_samples_study(classical_w(c), ApparatusProfile::gaussian(1.0),
                                                 c.alphas, c.delta, c.confidence, c.reps, seed))
                 .first;
    }
    return it->second;
}

RunResult classical_run(const Scenario &s) {
    const auto c = classical_params(s);
    const auto w = classical_w(c);
    RunResult r;
    CsvTable wt{{"f", "w"}, {}};
    for (std::size_t i = 0; i < w.size(); ++i) {
        wt.add({w.abscissa(i), w.values()[i].real()});
    }
    r.files["w.csv"] = to_csv(wt);
    CsvTable q{{"alpha", "mean_w", "mean_reading", "variance_w", "variance_reading"}, {}};
    for (const auto &x : classical_quadrature(c)) {
        q.add({x.alpha, x.mean_w, x.mean_reading, x.var_w, x.var_reading});
    }
    r.files["reading_moments.csv"] = to_csv(q);
    const auto &study = classical_study(c, s.seed);
    CsvTable n{{"alpha", "required_n", "success_rate"}, {}};
    for (const auto &pt : study.points) {
        n.add({pt.alpha, static_cast<double>(pt.n), pt.success_rate});
    }
    r.files["required_n.csv"] = to_csv(n);
    r.summary["exponent"] = study.exponent;
    return r;
}

std::vector<Check> classical_verify(const Scenario &s) {
    const auto c = classical_params(s);
    std::vector<Check> out;
    for (const auto &x : classical_quadrature(c)) {
        const std::string tag = " alpha=" + io::format(x.alpha);
        out.push_back({"mean preserved" + tag, x.mean_reading, x.mean_w, 1e-8});
        out.push_back({"variance additive" + tag, x.var_reading - x.var_g, x.var_w, 1e-8});
    }
    const auto &study = classical_study(c, s.seed);
    out.push_back({"required-N exponent", study.exponent, 2.0, 0.3});
    return out;
}

// ------------------------------------------------------------ two-level

struct TwoLevelParams {
    std::vector<double> alphas;
    std::vector<double> epsilons;
    double weak_epsilon;
};

TwoLevelParams two_level_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"alpha", "epsilon", "weak_epsilon"}, "params");
    TwoLevelParams t{range(p, "alpha", 0.2, 20.0, 20), range(p, "epsilon", 0.05, 0.95, 19),
                     num(p, "weak_epsilon", 0.1)};
    for (double a : t.alphas) {
        detail::require(a > 0.0, "params.alpha: must be positive");
    }
    for (double e : t.epsilons) {
        detail::require(e > 0.0 && e <= 2.0, "params.epsilon: must lie in (0, 2]");
    }
    return t;
}

RunResult two_level_run(const Scenario &s) {
    const auto t = two_level_params(s);
    RunResult r;
    std::ostringstream os;
    write_mean_surface(os, two_level_mean_surface(t.alphas, t.epsilons));
    r.files["mean_surface.csv"] = os.str();
    auto [sys, spec] = two_level_example(t.weak_epsilon);
    r.summary["weak_value"] = io::to_json(weak_value(sys, spec, 1));
    return r;
}

std::vector<Check> two_level_verify(const Scenario &s) {
    const auto t = two_level_params(s);
    std::vector<Check> out;
    double worst = 0.0;
    for (const auto &pt : two_level_mean_surface(t.alphas, t.epsilons)) {
        worst = std::max(worst, std::abs(pt.mean_f - two_level_mean_closed_form(pt.epsilon, pt.alpha)));
    }
    out.push_back({"surface vs closed form (max deviation)", worst, 0.0, 1e-8});
    auto [sys, spec] = two_level_example(t.weak_epsilon);
    const cplx fbar = weak_value(sys, spec, 1);
    out.push_back({"weak value eps=" + io::format(t.weak_epsilon), fbar.real(),
                   1.0 - 1.0 / t.weak_epsilon + 1.0, 1e-9});
    auto [s2, spec2] = two_level_example(0.01);
    out.push_back({"strong limit eps=0.01", read_meter(s2, spec2, ApparatusProfile::delta()).mean,
                   1.5, 0.01});
    return out;
}

// -------------------------------------------------------- no-postselect

struct NoPostParams {
    FiniteSystem sys;
    TransitionSpec spec;
    Matrix basis;
    double alpha;
};

NoPostParams no_post_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"system", "transition", "basis", "alpha"}, "params");
    detail::require(p.contains("system") && p.contains("transition"),
                    "params: needs 'system' and 'transition'");
    auto sys = io::system(p.at("system"), "params.system");
    auto spec = io::transition(p.at("transition"), sys, "params.transition");
    detail::require(!spec.psi1, "params.transition.psi1: the final state is not observed here");
    Matrix basis = p.contains("basis") ? io::matrix(p.at("basis"), "params.basis")
                                       : Matrix::Identity(sys.dim(), sys.dim());
    const double alpha = num(p, "alpha", 20.0);
    detail::require(alpha >= 1.0, "params.alpha: must be >= 1");
    return {std::move(sys), std::move(spec), std::move(basis), alpha};
}

RunResult no_post_run(const Scenario &s) {
    auto p = no_post_params(s);
    auto avg = average_over_final_states(p.sys, p.spec, p.basis);
    RunResult r;
    CsvTable fs{{"m", "probability", "re_weak1", "im_weak1"}, {}};
    const auto deriv = state_derivatives(p.sys, p.spec, 1);
    const Vector free_final = p.sys.propagator(p.spec.total_time) * p.spec.psi0;
    for (Eigen::Index m = 0; m < p.sys.dim(); ++m) {
        const cplx c = p.basis.col(m).dot(free_final);
        const cplx w = std::abs(c) > 1e-12 ? I * p.basis.col(m).dot(deriv[1]) / c
                                           : cplx(std::nan(""), std::nan(""));
        fs.add({static_cast<double>(m), avg.probabilities[static_cast<std::size_t>(m)], w.real(),
                w.imag()});
    }
    r.files["final_states.csv"] = to_csv(fs);
    std::ostringstream smooth;
    std::ostringstream spikes;
    csv::write_smooth(smooth, avg.averaged_distribution);
    csv::write_spikes(spikes, avg.averaged_distribution);
    r.files["averaged_distribution.csv"] = smooth.str();
    r.files["averaged_distribution_spikes.csv"] = spikes.str();
    auto rd = no_post_selection_readings(p.sys, p.spec, p.basis, ApparatusProfile::gaussian(p.alpha));
    CsvTable rt{{"alpha", "predicted_mean", "direct_mean", "predicted_second_moment",
                 "direct_second_moment"},
                {}};
    rt.add({p.alpha, rd.predicted_mean, rd.direct_mean, rd.predicted_second_moment,
            rd.direct_second_moment});
    r.files["readings.csv"] = to_csv(rt);
    r.summary["mean_weak1"] = io::to_json(avg.mean_weak1);
    r.summary["mean_weak2"] = io::to_json(avg.mean_weak2);
    return r;
}

std::vector<Check> no_post_verify(const Scenario &s) {
    auto p = no_post_params(s);
    auto avg = average_over_final_states(p.sys, p.spec, p.basis);
    std::vector<Check> out;
    out.push_back({"Im <f-bar>", avg.mean_weak1.imag(), 0.0, 1e-10});
    out.push_back({"Re <f-bar^2> = sum P_m |f-bar_m|^2", avg.mean_weak2.real(),
                   avg.weighted_weak_square, 1e-8});
    if (const auto *imp = std::get_if<Impulsive>(&p.spec.coupling)) {
        const Vector at_t0 = p.sys.propagator(imp->t0) * p.spec.psi0;
        double worst = 0.0;
        for (const auto &sp : avg.averaged_distribution.spikes()) {
            Eigen::Index k = 0;
            (p.sys.eigenvalues().array() - sp.location).abs().minCoeff(&k);
            worst = std::max(worst, std::abs(sp.weight - std::norm(p.sys.eigenvectors().col(k).dot(at_t0))));
        }
        out.push_back({"weights equal Born probabilities (max deviation)", worst, 0.0, 1e-12});
    }
    auto rd = no_post_selection_readings(p.sys, p.spec, p.basis, ApparatusProfile::gaussian(p.alpha));
    out.push_back({"second-moment prediction alpha=" + io::format(p.alpha), rd.direct_second_moment,
                   rd.predicted_second_moment, 1e-4, true});
    return out;
}

// ------------------------------------------------------------ traversal

struct TraversalParams {
    RadialSquare well;
    double k;
    double smear;
    TauGrid grid;
    std::vector<double> omegas;
    std::optional<SpinClock> clock_spec; // omega of the clock set later
    double clock_spread = 0.01;
};

TraversalParams traversal_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"omega", "radius", "k", "smear", "tau", "omega_scan", "larmor"}, "params");
    TraversalParams t;
    t.well = {num(p, "omega", -2.0), num(p, "radius", 1.0)};
    t.k = num(p, "k", 1.0);
    detail::require(t.well.radius > 0.0 && t.k > 0.0, "params: radius and k must be positive");
    t.smear = num(p, "smear", 0.03) * t.well.radius * t.well.radius;
    t.grid = {0.0, 0.005, 8192};
    if (p.contains("tau")) {
        const auto &g = p.at("tau");
        io::check_keys(g, {"centre", "step", "points"}, "params.tau");
        t.grid.centre = io::number_or(g, "centre", 0.0, "params.tau");
        t.grid.step = io::number_or(g, "step", 0.005, "params.tau");
        t.grid.points = count(g, "points", 8192, 64);
    }
    t.omegas = range(p, "omega_scan", -5.0, 5.0, 101);
    if (p.contains("larmor")) {
        const auto &l = p.at("larmor");
        io::check_keys(l, {"j", "spread"}, "params.larmor");
        t.clock_spec = SpinClock{io::number_or(l, "j", 1e4, "params.larmor"), 1.0};
        t.clock_spread = io::number_or(l, "spread", 0.01, "params.larmor");
        t.clock_spec->validate();
    }
    return t;
}

RunResult traversal_run(const Scenario &s) {
    const auto t = traversal_params(s);
    RunResult r;
    auto phi = traversal_amplitude(t.well, t.k, t.grid, t.smear);
    std::ostringstream os;
    csv::write_smooth(os, phi, "tau,re_phi,im_phi");
    r.files["traversal_phi.csv"] = os.str();
    CsvTable bar{{"omega", "tau_bar"}, {}};
    for (double w : t.omegas) {
        bar.add({w, traversal_weak_value({w, t.well.radius}, t.k, 1).real()});
    }
    r.files["tau_bar.csv"] = to_csv(bar);
    const cplx t1 = traversal_weak_value(t.well, t.k, 1);
    r.summary["tau_bar"] = io::to_json(t1);
    r.summary["tau2_bar"] = io::to_json(traversal_weak_value(t.well, t.k, 2));
    if (t.clock_spec) {
        auto clock = *t.clock_spec;
        clock.omega = t.clock_spread / std::sqrt(clock.j) / std::abs(t1.real());
        auto reading = larmor_clock(t.well, t.k, clock);
        r.summary["larmor"] = {{"j", clock.j},           {"omega", clock.omega},
                               {"t_bar", reading.t_bar}, {"t2_bar", reading.t2_bar},
                               {"jy", reading.jy},       {"jy2", reading.jy2}};
    }
    return r;
}

std::vector<Check> traversal_verify(const Scenario &s) {
    const auto t = traversal_params(s);
    std::vector<Check> out;
    double worst_im = 0.0;
    double worst_var = 0.0;
    for (double w : t.omegas) {
        const RadialSquare m{w, t.well.radius};
        const cplx t1 = traversal_weak_value(m, t.k, 1);
        const cplx t2 = traversal_weak_value(m, t.k, 2);
        worst_im = std::max(worst_im, std::abs(t1.imag()));
        worst_var = std::max(worst_var, std::abs(t2.real() - t1.real() * t1.real()) /
                                            (t1.real() * t1.real()));
    }
    out.push_back({"max |Im tau-bar| over scan", worst_im, 0.0, 1e-8});
    out.push_back({"max |Re tau2-bar - tau-bar^2| / tau-bar^2", worst_var, 0.0, 1e-6});
    const double tau = traversal_weak_value(t.well, t.k, 1).real();
    const cplx s0 = transmission(t.well, t.k);
    auto ratio = [&](double l) {
        return transmission(RadialSquare{t.well.omega + l, t.well.radius}, t.k) / s0;
    };
    auto report = zero_variance_detector(ratio, traversal_amplitude(t.well, t.k, t.grid, t.smear));
    out.push_back({"zero variance classified improper (1 = yes)",
                   report.verdict == SharpnessVerdict::improper_sharpness ? 1.0 : 0.0, 1.0, 0.0});
    out.push_back({"support points above 1% of peak (>= 10)",
                   static_cast<double>(std::min<std::size_t>(report.support_points, 10)), 10.0, 0.0});
    if (t.clock_spec) {
        auto clock = *t.clock_spec;
        clock.omega = t.clock_spread / std::sqrt(clock.j) / std::abs(tau);
        auto reading = larmor_clock(t.well, t.k, clock);
        out.push_back({"Larmor T-bar vs tau-bar", reading.t_bar, tau, 1e-2, true});
        out.push_back({"Larmor T2-bar vs T-bar^2", reading.t2_bar, reading.t_bar * reading.t_bar,
                       1e-4, true});
    }
    return out;
}

// ----------------------------------------------------------- phase-time

struct PhaseTimeParams {
    ScatterModel model;
    double p;
    double x_from;
    double x_to;
    std::vector<double> ratios;
    std::optional<double> sigma_k;
};

PhaseTimeParams phase_time_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"barrier", "p", "x_window", "omega_over_p", "wavepacket_sigma_k"}, "params");
    PhaseTimeParams t;
    t.model = DeltaBarrier{1.0};
    if (p.contains("barrier")) {
        const auto &b = p.at("barrier");
        io::check_keys(b, {"type", "omega", "width"}, "params.barrier");
        const auto type = b.value("type", std::string("delta"));
        const double omega = io::number_or(b, "omega", 1.0, "params.barrier");
        if (type == "delta") {
            detail::require(!b.contains("width"), "params.barrier.width: not for a delta barrier");
            t.model = DeltaBarrier{omega};
        } else {
            detail::require(type == "rectangular",
                            "params.barrier.type: expected 'delta' or 'rectangular'");
            t.model = RectangularBarrier{omega, io::number_or(b, "width", 1.0, "params.barrier")};
        }
    }
    validate(t.model);
    t.p = num(p, "p", 1.0);
    detail::require(t.p > 0.0, "params.p: must be positive");
    auto win = list(p, "x_window", {-10.0, 2.0});
    detail::require(win.size() == 2 && win[0] < win[1], "params.x_window: expected [from, to]");
    t.x_from = win[0];
    t.x_to = win[1];
    t.ratios = range(p, "omega_over_p", 0.0, 5.0, 101);
    if (p.contains("wavepacket_sigma_k")) {
        t.sigma_k = num(p, "wavepacket_sigma_k", 0.01);
        detail::require(*t.sigma_k > 0.0, "params.wavepacket_sigma_k: must be positive");
    }
    return t;
}

ScatterModel with_strength(const ScatterModel &m, double omega) {
    return std::visit(
        [omega](const auto &x) -> ScatterModel {
            auto y = x;
            y.omega = omega;
            return y;
        },
        m);
}

double strength(const ScatterModel &m) {
    return std::visit([](const auto &x) { return x.omega; }, m);
}

RunResult phase_time_run(const Scenario &s) {
    const auto t = phase_time_params(s);
    RunResult r;
    auto phi = delay_amplitude(t.model, t.p);
    CsvTable a{{"x", "re_phi", "im_phi"}, {}};
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double x = phi.abscissa(i);
        if (x >= t.x_from && x <= t.x_to) {
            a.add({x, phi.values()[i].real(), phi.values()[i].imag()});
        }
    }
    r.files["delay_amplitude.csv"] = to_csv(a);
    std::ostringstream sp;
    csv::write_spikes(sp, phi);
    r.files["delay_amplitude_spikes.csv"] = sp.str();
    CsvTable pt{{"omega_over_p", "tau_phase"}, {}};
    for (double q : t.ratios) {
        pt.add({q, phase_time(with_strength(t.model, q * t.p), t.p)});
    }
    r.files["phase_time.csv"] = to_csv(pt);
    r.summary["tau_phase"] = phase_time(t.model, t.p);
    r.summary["transmission"] = io::to_json(transmission(t.model, t.p));
    if (t.sigma_k) {
        auto wp = wavepacket_delay(t.model, t.p, {.sigma_k = *t.sigma_k * t.p});
        r.summary["wavepacket"] = {{"centroid_delay", wp.centroid_delay},
                                   {"transmission_probability", wp.transmission_probability},
                                   {"time", wp.time}};
    }
    return r;
}

std::vector<Check> phase_time_verify(const Scenario &s) {
    const auto t = phase_time_params(s);
    std::vector<Check> out;
    const double tau = phase_time(t.model, t.p);
    if (std::holds_alternative<DeltaBarrier>(t.model)) {
        const double w = strength(t.model);
        out.push_back({"delta tau_phase closed form", tau, w / (t.p * (t.p * t.p + w * w)), 1e-6,
                       true});
    } else {
        const auto &b = std::get<RectangularBarrier>(t.model);
        out.push_back({"opaque approximation -a/p", opaque_phase_time(b, t.p), -b.width / t.p, 1e-9,
                       true});
    }
    auto phi = delay_amplitude(t.model, t.p);
    double peak = 0.0;
    double beyond = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        peak = std::max(peak, std::abs(phi.values()[i]));
        if (phi.abscissa(i) > 0.0) {
            beyond = std::max(beyond, std::abs(phi.values()[i]));
        }
    }
    out.push_back({"causality max_{x>0}|Phi| / peak", beyond / peak, 0.0, 1e-6});
    out.push_back({"|int Phi - T(p)|", std::abs(total_integral(phi) - transmission(t.model, t.p)),
                   0.0, 1e-6});
    if (t.sigma_k) {
        auto wp = wavepacket_delay(t.model, t.p, {.sigma_k = *t.sigma_k * t.p});
        out.push_back({"wavepacket centroid delay vs tau_phase", wp.centroid_delay, tau, 1e-2, true});
    }
    return out;
}

// ------------------------------------------------------------------ lam

struct LamParams {
    PartialWaveSet pw;
    std::vector<double> thetas;
    double w_theta;
    LamOptions opt;
};

LamParams lam_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"partial_waves", "k", "energy", "theta", "w_theta", "l_max", "prefactor"},
                   "params");
    detail::require(p.contains("partial_waves"), "params.partial_waves: missing");
    LamParams l;
    const auto &src = p.at("partial_waves");
    if (src.is_string()) {
        auto path = std::filesystem::path(src.get<std::string>());
        if (path.is_relative()) {
            path = s.base_dir / path;
        }
        l.pw = io::ingest_partial_waves(path, num(p, "k", 1.0), num(p, "energy", 0.0));
    } else {
        l.pw = io::partial_waves(src, "params.partial_waves");
    }
    if (p.contains("prefactor")) {
        l.pw.prefactor = io::complex(p.at("prefactor"), "params.prefactor");
        l.pw.validate();
    }
    l.thetas = range(p, "theta", 0.02 * pi, 0.98 * pi, 481);
    l.w_theta = num(p, "w_theta", 50.0 * pi / 180.0);
    l.opt.l_max = static_cast<int>(count(p, "l_max", 2048, 2));
    detail::require(l.opt.l_max % 2 == 0, "params.l_max: must be even");
    for (double th : l.thetas) {
        detail::require(th >= l.opt.edge_margin - 1e-12 && th <= pi - l.opt.edge_margin + 1e-12,
                        "params.theta: angles must lie in [0.02 pi, 0.98 pi]");
    }
    return l;
}

RunResult lam_run(const Scenario &s) {
    const auto l = lam_params(s);
    RunResult r;
    CsvTable dcs{{"theta", "dcs"}, {}};
    CsvTable lt{{"theta", "lam"}, {}};
    for (double th : l.thetas) {
        dcs.add({th, differential_cross_section(l.pw, th)});
        lt.add({th, lam(l.pw, th)});
    }
    r.files["dcs.csv"] = to_csv(dcs);
    r.files["lam.csv"] = to_csv(lt);
    auto d = LamSpectrum(l.pw, l.opt).at(l.w_theta, amplitude(l.pw, l.w_theta));
    CsvTable w{{"L", "w_L"}, {}};
    for (std::size_t i = 0; i < d.l.size(); ++i) {
        w.add({static_cast<double>(d.l[i]), d.w[i]});
    }
    r.files["w_L.csv"] = to_csv(w);
    r.summary["w_theta"] = l.w_theta;
    r.summary["lam_at_w_theta"] = d.lam;
    r.summary["j_max"] = l.pw.j_max();
    return r;
}

std::vector<Check> lam_verify(const Scenario &s) {
    const auto l = lam_params(s);
    LamSpectrum sp(l.pw, l.opt);
    double worst_sum = 0.0;
    double worst_lam = 0.0;
    for (double th : l.thetas) {
        auto d = sp.at(th, amplitude(l.pw, th));
        worst_sum = std::max(worst_sum, std::abs(d.weight_sum() - 1.0));
        worst_lam = std::max(worst_lam, std::abs(d.lam - lam(l.pw, th)));
    }
    std::vector<Check> out;
    out.push_back({"max |sum w_L - 1|", worst_sum, 0.0, 1e-6});
    out.push_back({"max |sum L w_L - LAM|", worst_lam, 0.0, 1e-4});
    auto d = sp.at(l.w_theta, amplitude(l.pw, l.w_theta));
    out.push_back({"w_L changes sign at w_theta (1 = yes)",
                   *std::min_element(d.w.begin(), d.w.end()) < 0.0 ? 1.0 : 0.0, 1.0, 0.0});
    return out;
}

// ------------------------------------------------------------ three-box

struct ThreeBoxParams {
    PathAmplitudeSet boxes;
    std::vector<std::size_t> box_watch;
    PathAmplitudeSet slits;
    std::vector<std::size_t> slit_watch;
};

std::vector<std::size_t> one_based(const json &p, const char *key, std::vector<std::size_t> fallback,
                                   std::size_t d) {
    if (!p.contains(key)) {
        return fallback;
    }
    std::vector<std::size_t> out;
    for (double x : io::numbers(p.at(key), key)) {
        detail::require(x >= 1.0 && x <= static_cast<double>(d) && x == std::floor(x),
                        std::string(key) + ": path numbers run from 1 to " + std::to_string(d));
        out.push_back(static_cast<std::size_t>(x) - 1);
    }
    return out;
}

ThreeBoxParams three_box_params(const Scenario &s) {
    const auto &p = s.params;
    io::check_keys(p, {"boxes", "slits"}, "params");
    ThreeBoxParams t;
    auto box = three_box();
    json bj = p.value("boxes", json::object());
    io::check_keys(bj, {"psi0", "psi1", "watch"}, "params.boxes");
    Vector psi0 = bj.contains("psi0") ? io::state(bj.at("psi0"), "params.boxes.psi0") : box.psi0;
    Vector psi1 = bj.contains("psi1") ? io::state(bj.at("psi1"), "params.boxes.psi1") : box.psi1;
    detail::require(psi0.size() == 3 && psi1.size() == 3, "params.boxes: states need 3 entries");
    t.boxes = path_amplitudes(box.system, psi0, psi1);
    t.box_watch = one_based(bj, "watch", {0, 1, 2}, 3);
    json sj = p.value("slits", json::object());
    io::check_keys(sj, {"amplitudes", "watch"}, "params.slits");
    if (sj.contains("amplitudes")) {
        const auto v = io::vector(sj.at("amplitudes"), "params.slits.amplitudes");
        t.slits.amplitudes.assign(v.data(), v.data() + v.size());
    } else {
        t.slits.amplitudes = {1.0, 1.0, -1.0};
    }
    t.slits.validate();
    t.slit_watch = one_based(sj, "watch", {0}, t.slits.size());
    return t;
}

RunResult three_box_run(const Scenario &s) {
    const auto t = three_box_params(s);
    RunResult r;
    CsvTable b{{"box", "probability"}, {}};
    for (std::size_t k : t.box_watch) {
        b.add({k + 1.0, watched_probabilities(t.boxes, watch(3, {k}))[0]});
    }
    r.files["box_probabilities.csv"] = to_csv(b);
    CsvTable sl{{"slit", "probability"}, {}};
    for (std::size_t k : t.slit_watch) {
        sl.add({k + 1.0, watched_probabilities(t.slits, watch(t.slits.size(), {k}))[0]});
    }
    r.files["slit_probabilities.csv"] = to_csv(sl);
    CsvTable sh{{"first", "second", "original_count", "reduced_count", "cancels", "count_unchanged"},
                {}};
    if (t.slits.size() >= 3) {
        for (std::size_t i = 0; i < t.slits.size(); ++i) {
            for (std::size_t j = i + 1; j < t.slits.size(); ++j) {
                auto x = shutter_sensitivity(t.slits, i, j);
                sh.add({i + 1.0, j + 1.0, x.original_count, x.reduced_count, x.cancels ? 1.0 : 0.0,
                        x.count_unchanged ? 1.0 : 0.0});
            }
        }
    }
    r.files["shutters.csv"] = to_csv(sh);
    json amps = json::array();
    for (const auto &a : t.boxes.amplitudes) {
        amps.push_back(io::to_json(a));
    }
    r.summary["box_amplitudes"] = amps;
    return r;
}

std::vector<Check> three_box_verify(const Scenario &s) {
    const auto t = three_box_params(s);
    std::vector<Check> out;
    out.push_back({"P(box 1)", watched_probabilities(t.boxes, watch(3, {0}))[0], 1.0, 1e-12});
    out.push_back({"P(box 2)", watched_probabilities(t.boxes, watch(3, {1}))[0], 1.0, 1e-12});
    auto ps = watched_probabilities(t.slits, watch(t.slits.size(), {0}));
    out.push_back({"slit 1 watched: P(1)", ps[0], 1.0, 1e-12});
    out.push_back({"slit 1 watched: P(rest)", ps.size() > 1 ? ps[1] : 0.0, 0.0, 1e-12});
    if (t.slits.size() >= 3) {
        out.push_back({"count-preserving shutter pairs",
                       static_cast<double>(count_preserving_pairs(t.slits).size()), 2.0, 0.0});
    }
    out.push_back({"count-preserving pairs for (1,1,1)",
                   static_cast<double>(
                       count_preserving_pairs(PathAmplitudeSet{{1.0, 1.0, 1.0}, {}}).size()),
                   0.0, 0.0});
    return out;
}

} // namespace

const std::vector<Kind> &kinds() {
    static const std::vector<Kind> registry = {
        {"dist", "moments and variance zero of the sine family; complex mixtures", dist_run,
         dist_verify},
        {"classical", "classical meter: reading moments and Monte-Carlo required-N scaling",
         classical_run, classical_verify},
        {"two-level", "mean meter reading surface <f>(alpha, epsilon) of the two-state example",
         two_level_run, two_level_verify},
        {"no-postselect", "readings without post-selection: averaged weak values and Born weights",
         no_post_run, no_post_verify},
        {"traversal", "s-wave traversal time: Phi(tau), tau-bar vs omega, Larmor clock",
         traversal_run, traversal_verify},
        {"phase-time", "delay amplitude Phi_p(x) and phase time vs omega/p", phase_time_run,
         phase_time_verify},
        {"lam", "partial-wave DCS, local angular momentum and w_L decomposition", lam_run,
         lam_verify},
        {"three-box", "grouped path probabilities, three-box and three-slit shutters",
         three_box_run, three_box_verify},
    };
    return registry;
}

const Kind &find_kind(const std::string &name) {
    for (const auto &k : kinds()) {
        if (k.name == name) {
            return k;
        }
    }
    throw InvalidArgument("unknown scenario kind '" + name + "' (see `weakval list`)");
}

Scenario load_scenario(const std::filesystem::path &config) {
    const json j = io::parse_file(config);
    io::check_keys(j, {"name", "kind", "seed", "output_dir", "params"}, config.string());
    detail::require(j.contains("name") && j.at("name").is_string() &&
                        !j.at("name").get<std::string>().empty(),
                    "config: 'name' must be a non-empty string");
    detail::require(j.contains("kind") && j.at("kind").is_string(), "config: 'kind' missing");
    Scenario s;
    s.name = j.at("name").get<std::string>();
    s.kind = j.at("kind").get<std::string>();
    if (j.contains("seed")) {
        detail::require(j.at("seed").is_number_unsigned(), "config: 'seed' must be a non-negative integer");
        s.seed = j.at("seed").get<std::uint64_t>();
    }
    s.base_dir = config.parent_path();
    s.output_dir = j.contains("output_dir") ? std::filesystem::path(j.at("output_dir").get<std::string>())
                                            : std::filesystem::path("weakval-out") / s.name;
    if (j.contains("params")) {
        detail::require(j.at("params").is_object(), "config: 'params' must be an object");
        s.params = j.at("params");
    }
    (void)find_kind(s.kind);
    return s;
}

} // namespace weakval::cli
