// SPDX-License-Identifier: Apache-2.0
//
// quantmimo: link-level simulation of one-bit massive MIMO uplinks
// Copyright (C) 2026 The quantmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QUANTMIMO_XP_HPP
#define QUANTMIMO_XP_HPP

#include "quantmimo/sysconfig.hpp"
#include "quantmimo/table.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qm
{
    enum class OutputFormat
    {
        Csv,
        Json
    };

    struct RunOptions
    {
        std::uint64_t seed = 1;
        std::optional<int> trials; // per grid point; unset means the figure default
        int threads = 1;
    };

    // One grid point of a sweep: the swept value and the fully resolved configuration.
    struct SweepPoint
    {
        std::string variable;
        double value = 0.0;
        std::string scenario; // series tag inside the figure
        SystemConfig config;
    };

    struct PointError
    {
        int point = 0;
        ErrorCode code = ErrorCode::InvalidArgument;
        std::string message;
    };

    struct SweepResult
    {
        std::string figure;
        std::vector<SweepPoint> points;
        std::vector<double> grid;
        int trials = 0;
        Table table;
        std::vector<PointError> errors;
        double elapsed_s = 0.0;
        nlohmann::ordered_json manifest;
    };

    const std::vector<std::string> &figure_ids(); // fig2 .. fig8, custom
    int default_trials(const std::string &figure);

    // Grid of the named figure. `base` is required for "custom" and ignored otherwise.
    std::vector<SweepPoint> figure_points(const std::string &figure, std::uint64_t seed, const SystemConfig *base = nullptr);

    // Column sets of the emitted tables.
    const std::vector<std::string> &rate_columns();
    const std::vector<std::string> &quality_columns();
    const std::vector<std::string> &scatter_columns();

    // Runs every point; errors are recorded per point and never abort the sweep.
    SweepResult run_sweep(const std::string &figure, const RunOptions &opts, const SystemConfig *base = nullptr);

    // Writes <figure>.csv (or .json) and manifest.json into `dir`, creating it if needed.
    void write_sweep(const SweepResult &result, const std::string &dir, OutputFormat format);

    std::string version_string();

    struct GoldenCheck
    {
        std::string name;
        double value = 0.0;
        double expected = 0.0;
        double tolerance = 0.0;
        bool pass() const;
    };

    // Deterministic closed-form reference values.
    std::vector<GoldenCheck> golden_suite();
}

#endif
