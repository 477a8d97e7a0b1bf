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

// weakval run <config> [--out DIR]   compute outputs and write a manifest
// weakval verify <config>            evaluate golden checks; exit 4 on failure
// weakval list                       show available scenario kinds
//
// Exit codes: 0 ok, 1 internal error, 2 invalid input, 3 numerical
// precondition violated, 4 golden check failed.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace weakval;
using namespace weakval::cli;

namespace {

std::string sha256(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return os.str();
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    detail::require(static_cast<bool>(in), "cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void apply_seed_override(Scenario &s) {
    if (const char *env = std::getenv("WEAKVAL_SEED"); env && *env) {
        char *end = nullptr;
        const auto v = std::strtoull(env, &end, 10);
        detail::require(*end == '\0' && env[0] != '-', "WEAKVAL_SEED: expected a non-negative integer");
        s.seed = v;
    }
}

/// Stage every file next to its target, then rename; a failure leaves no partial outputs.
void write_outputs(const fs::path &dir, const std::map<std::string, std::string> &files) {
    fs::create_directories(dir);
    std::vector<std::pair<fs::path, fs::path>> staged;
    try {
        for (const auto &[name, body] : files) {
            const fs::path target = dir / name;
            const fs::path tmp = dir / ("." + name + ".tmp");
            std::ofstream out(tmp, std::ios::binary);
            out << body;
            out.close();
            if (!out) {
                throw std::runtime_error("cannot write " + tmp.string());
            }
            staged.emplace_back(tmp, target);
        }
    } catch (...) {
        for (const auto &[tmp, _] : staged) {
            std::error_code ec;
            fs::remove(tmp, ec);
        }
        throw;
    }
    for (const auto &[tmp, target] : staged) {
        fs::rename(tmp, target);
    }
}

int run(const fs::path &config, const std::string &out_override) {
    Scenario s = load_scenario(config);
    apply_seed_override(s);
    const Kind &kind = find_kind(s.kind);
    RunResult r = kind.run(s);

    fs::path out = out_override.empty() ? s.output_dir : fs::path(out_override);
    if (out_override.empty() && out.is_relative()) {
        out = s.base_dir / out;
    }

    json manifest;
    const std::string cfg = slurp(config);
    manifest["name"] = s.name;
    manifest["kind"] = s.kind;
    manifest["seed"] = s.seed;
    manifest["config"] = json::parse(cfg);
    manifest["config_sha256"] = sha256(cfg);
    json checks = json::array();
    for (const auto &c : kind.verify(s)) {
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"target", c.target},
                          {"tolerance", c.tolerance},
                          {"relative", c.relative},
                          {"pass", c.pass()}});
    }
    manifest["checks"] = checks;
    manifest["summary"] = r.summary;
    json outputs = json::array();
    for (const auto &[name, body] : r.files) {
        outputs.push_back({{"file", name}, {"sha256", sha256(body)}, {"bytes", body.size()}});
    }
    manifest["outputs"] = outputs;
    r.files["manifest.json"] = manifest.dump(2) + "\n";
    write_outputs(out, r.files);

    std::cout << "wrote " << r.files.size() << " files to " << out.string() << "\n";
    return 0;
}

int verify(const fs::path &config) {
    Scenario s = load_scenario(config);
    apply_seed_override(s);
    const auto checks = find_kind(s.kind).verify(s);
    bool all = true;
    for (const auto &c : checks) {
        all = all && c.pass();
        std::printf("%s  %-52s value=%.12g target=%.12g tol=%.3g%s\n", c.pass() ? "PASS" : "FAIL",
                    c.name.c_str(), c.value, c.target, c.tolerance, c.relative ? " (rel)" : "");
    }
    std::printf("%s: %zu checks, %s\n", s.name.c_str(), checks.size(),
                all ? "all passed" : "FAILED");
    return all ? 0 : 4;
}

int list() {
    for (const auto &k : kinds()) {
        std::printf("%-14s %s\n", k.name.c_str(), k.description.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"weakval: weak values, improper distributions and time/angle decompositions"};
    app.require_subcommand(1);
    std::string config;
    std::string out;
    auto *run_cmd = app.add_subcommand("run", "run a scenario and write its outputs");
    run_cmd->add_option("config", config, "scenario JSON")->required();
    run_cmd->add_option("--out", out, "output directory (overrides output_dir)");
    auto *verify_cmd = app.add_subcommand("verify", "check a scenario against golden values");
    verify_cmd->add_option("config", config, "scenario JSON")->required();
    app.add_subcommand("list", "list scenario kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            return run(config, out);
        }
        if (verify_cmd->parsed()) {
            return verify(config);
        }
        return list();
    } catch (const PreconditionError &e) {
        std::cerr << "weakval: precondition violated: " << e.what() << "\n";
        return 3;
    } catch (const InvalidArgument &e) {
        std::cerr << "weakval: invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "weakval: internal error: " << e.what() << "\n";
        return 1;
    }
}
