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

#include "quantmimo/cli.hpp"
#include "quantmimo/xp.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>
#include <thread>

namespace qm
{
    namespace
    {
        int selftest(std::ostream &out)
        {
            int failed = 0;
            for (const auto &g : golden_suite())
            {
                out << (g.pass() ? "PASS " : "FAIL ") << g.name << ": " << std::setprecision(12) << g.value
                    << " (expected " << g.expected << " +/- " << g.tolerance << ")\n";
                failed += !g.pass();
            }
            out << (failed ? "selftest failed: " + std::to_string(failed) + " check(s)" : std::string("selftest passed"))
                << '\n';
            return failed ? 1 : 0;
        }
    }

    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"quantmimo: one-bit massive MIMO uplink simulator", "quantmimo"};
        app.require_subcommand(1, 1);

        std::string config_path, out_dir = ".", format = "csv";
        std::uint64_t seed = 1;
        int trials = -1;
        int threads = int(std::max(1u, std::thread::hardware_concurrency()));

        auto add_common = [&](CLI::App *s)
        {
            s->add_option("--config", config_path, "JSON system configuration");
            s->add_option("--seed", seed, "master seed");
            s->add_option("--trials", trials, "Monte-Carlo trials per grid point")->check(CLI::NonNegativeNumber);
            s->add_option("--out", out_dir, "output directory");
            s->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
            s->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
        };

        std::vector<std::pair<std::string, CLI::App *>> subs;
        for (const auto &id : figure_ids())
        {
            auto *s = app.add_subcommand(id, id == "custom" ? "run the configuration given by --config"
                                                            : "reproduce the sweep behind " + id);
            add_common(s);
            subs.emplace_back(id, s);
        }
        auto *st = app.add_subcommand("selftest", "closed-form golden suite");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return 0;
        }
        catch (const CLI::ParseError &e)
        {
            err << "usage error: " << e.what() << "\n" << app.help();
            return 2;
        }

        if (st->parsed())
            return selftest(out);

        std::string figure;
        for (auto &[id, s] : subs)
            if (s->parsed())
                figure = id;

        SweepResult result;
        try
        {
            SystemConfig base;
            const SystemConfig *base_ptr = nullptr;
            if (figure == "custom")
            {
                if (config_path.empty())
                {
                    err << "usage error: custom needs --config <path>\n";
                    return 2;
                }
                base = load_config(config_path);
                require_valid(base);
                base_ptr = &base;
            }
            else if (!config_path.empty())
            {
                err << "usage error: --config only applies to custom\n";
                return 2;
            }
            RunOptions opts;
            opts.seed = seed;
            opts.threads = threads;
            if (trials >= 0)
                opts.trials = trials;
            result = run_sweep(figure, opts, base_ptr);
            write_sweep(result, out_dir, format == "json" ? OutputFormat::Json : OutputFormat::Csv);
        }
        catch (const Error &e)
        {
            err << "error: " << e.what() << '\n';
            return is_numerical(e.code()) ? 1 : 2;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << '\n';
            return 2;
        }

        out << figure << ": " << result.table.rows() << " rows, " << result.points.size() << " points, "
            << result.errors.size() << " errors, " << std::fixed << std::setprecision(2) << result.elapsed_s << " s -> "
            << out_dir << '\n';
        if (result.errors.empty())
            return 0;
        bool numerical_only = true;
        for (const auto &e : result.errors)
        {
            err << "point " << e.point << ": " << e.message << '\n';
            numerical_only = numerical_only && is_numerical(e.code);
        }
        return numerical_only ? 1 : 2;
    }
}
