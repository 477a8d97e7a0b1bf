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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "weakval/io.hpp"

namespace weakval::cli {

using io::json;

struct Scenario {
    std::string name;
    std::string kind;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::filesystem::path base_dir; // directory of the config file
    json params = json::object();
};

/// A golden check: |value - target| <= tolerance (times |target| if relative).
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool relative = false;

    [[nodiscard]] bool pass() const {
        const double scale = relative ? std::abs(target) : 1.0;
        return std::isfinite(value) && std::abs(value - target) <= tolerance * scale;
    }
};

/// File name -> contents, plus a machine-readable summary.
struct RunResult {
    std::map<std::string, std::string> files;
    json summary = json::object();
};

struct Kind {
    std::string name;
    std::string description;
    std::function<RunResult(const Scenario &)> run;
    std::function<std::vector<Check>(const Scenario &)> verify;
};

const std::vector<Kind> &kinds();
const Kind &find_kind(const std::string &name);

Scenario load_scenario(const std::filesystem::path &config);

} // namespace weakval::cli
