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

#include <catch2/catch_amalgamated.hpp>
#include "quantmimo/chest.hpp"
#include "quantmimo/cli.hpp"
#include "quantmimo/rates.hpp"
#include "quantmimo/xp.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace qm;
using Catch::Approx;
namespace fs = std::filesystem;

namespace
{
    struct CliRun
    {
        int code;
        std::string out, err;
    };

    CliRun cli(std::vector<std::string> args)
    {
        args.insert(args.begin(), "quantmimo");
        std::vector<const char *> argv;
        for (auto &a : args)
            argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(int(argv.size()), argv.data(), out, err);
        return {code, out.str(), err.str()};
    }

    // Runs the installed binary; returns the exit status.
    int run_binary(const std::string &args, const std::string &log)
    {
        const char *exe = std::getenv("QM_CLI");
        if (!exe)
            return -1;
        const int status = std::system(("'" + std::string(exe) + "' " + args + " > '" + log + "' 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    fs::path scratch(const std::string &name)
    {
        fs::path p = fs::temp_directory_path() / ("quantmimo_test_xp_" + name);
        fs::remove_all(p);
        return p;
    }

    double num(const Table &t, std::size_t row, const std::string &col)
    {
        const int c = t.column(col);
        REQUIRE(c >= 0);
        auto v = cell_number(t.row(row)[std::size_t(c)]);
        REQUIRE(v.has_value());
        return *v;
    }

    std::string text(const Table &t, std::size_t row, const std::string &col)
    {
        return format_cell(t.row(row)[std::size_t(t.column(col))]);
    }

    const char *bad_config = R"({"antennas": 64, "users": 5, "snr_db": 0, "taps": 20, "pilot_len": 99})";
    const char *small_config = R"({"antennas": 16, "users": 3, "snr_db": 5, "taps": 4, "data_len": 64,
                                   "combiner": "zfc", "seed": 3})";
}

TEST_CASE("xp - Registry")
{
    const auto &ids = figure_ids();
    CHECK(ids.size() == 8);
    CHECK(ids.front() == "fig2");
    CHECK(ids.back() == "custom");
    for (const auto &id : ids)
        CHECK(default_trials(id) >= 0);
    CHECK(default_trials("fig4") == 0);
    CHECK(default_trials("fig8") == 0);
    CHECK_THROWS_AS(default_trials("fig9"), Error);
    CHECK_THROWS_AS(figure_points("fig9", 1), Error);
    CHECK_THROWS_AS(figure_points("custom", 1), Error);

    auto f2 = figure_points("fig2", 1);
    CHECK(f2.size() == 2 * 3 * 2 * 40);
    for (const auto &p : f2)
    {
        CHECK(p.config.M() == 8);
        CHECK(p.config.L() == 4);
        CHECK(p.config.data_len == 64);
        CHECK(p.config.pilot_len == int(p.value) * p.config.K() * 4);
        CHECK(validate(p.config).ok());
    }
    auto f5 = figure_points("fig5", 1);
    CHECK(f5.size() == 20);
    for (const auto &p : f5)
    {
        CHECK(p.config.csi == CsiMode::Perfect);
        CHECK(p.config.M() == 128);
        CHECK(p.config.L() == int(p.value));
    }
    for (const auto &p : figure_points("fig8", 1))
    {
        CHECK(p.config.L() == 20);
        CHECK(p.config.pilot_len == 100);
    }
    int weak = 0;
    for (const auto &p : figure_points("fig7", 1))
        if (p.scenario == "weak_user")
        {
            ++weak;
            CHECK(p.config.users[0].snr(p.config.noise_floor) < p.config.users[1].snr(p.config.noise_floor));
        }
    CHECK(weak == 9);
    for (const auto &p : figure_points("fig3", 1))
        CHECK(p.config.alphabet == Alphabet::QAM16);
}

TEST_CASE("xp - Table round trip")
{
    Table t({"a", "b", "c", "d"});
    t.add_row({1LL, 0.1 + 0.2, std::string("mrc"), Cell()});
    t.add_row({-7LL, 6.02214076e23, std::string("x"), std::nan("")});
    CHECK_THROWS_AS(t.add_row({1LL}), Error);
    CHECK_THROWS_AS(Table(std::vector<std::string>{}), Error);
    CHECK(t.column("c") == 2);
    CHECK(t.column("zz") == -1);

    std::stringstream ss;
    t.write_csv(ss);
    Table back = Table::read_csv(ss);
    CHECK(back.columns() == t.columns());
    REQUIRE(back.rows() == 2);
    CHECK(*cell_number(back.row(0)[1]) == 0.1 + 0.2);
    CHECK(*cell_number(back.row(1)[1]) == 6.02214076e23);
    CHECK(*cell_number(back.row(1)[0]) == -7.0);
    CHECK(std::holds_alternative<std::monostate>(back.row(0)[3]));
    CHECK(std::isnan(*cell_number(back.row(1)[3])));
    CHECK(format_cell(back.row(0)[2]) == "mrc");

    std::stringstream js;
    t.write_json(js);
    auto j = nlohmann::json::parse(js.str());
    REQUIRE(j.size() == 2);
    CHECK(j[0]["a"] == 1);
    CHECK(j[0]["d"].is_null());
    CHECK(j[1]["d"].is_null());
    CHECK(j[0]["b"].get<double>() == 0.1 + 0.2);

    std::stringstream empty;
    CHECK_THROWS_AS(Table::read_csv(empty), Error);
}

TEST_CASE("xp - Quality sweep matches the closed form")
{
    RunOptions opts;
    opts.trials = 0;
    auto r = run_sweep("fig2", opts);
    CHECK(r.errors.empty());
    REQUIRE(r.table.rows() == r.points.size());
    CHECK(r.table.columns() == quality_columns());
    for (std::size_t i = 0; i < r.table.rows(); ++i)
    {
        const SystemConfig &c = r.points[i].config;
        const double analytic = c.quantized ? user_quality(c)(0) : user_quality(c, 0.0)(0);
        CHECK(std::abs(num(r.table, i, "c_k_db_analytic") - 10.0 * std::log10(analytic)) < 1e-12);
        CHECK(num(r.table, i, "mu") == r.points[i].value);
        CHECK(text(r.table, i, "c_k_db_empirical").empty());
    }

}

TEST_CASE("xp - Closed-form sweeps")
{
    RunOptions opts;
    auto r8 = run_sweep("fig8", opts);
    CHECK(r8.errors.empty());
    CHECK(r8.trials == 0);
    const double ceiling = rate_ceiling(make_equal_power_config(128, 5, 20, 10.0, 1, CombinerKind::ZFC));
    double prev = 0.0, last = 0.0;
    int ceiling_rows = 0;
    for (std::size_t i = 0; i < r8.table.rows(); ++i)
    {
        const std::string scen = text(r8.table, i, "scenario");
        if (scen == "ceiling")
        {
            ++ceiling_rows;
            CHECK(num(r8.table, i, "rate_limit_bpcu") == Approx(ceiling).epsilon(1e-12));
            continue;
        }
        if (text(r8.table, i, "combiner") == "zfc" && num(r8.table, i, "quantized") == 1.0 &&
            num(r8.table, i, "user") == 0.0)
        {
            const double v = num(r8.table, i, "rate_limit_bpcu");
            CHECK(v > prev);
            CHECK(v < ceiling);
            prev = last = v;
        }
        CHECK(text(r8.table, i, "rate_bpcu").empty());
    }
    CHECK(ceiling_rows == 31 * 5);
    // Flattening: the last 10 dB of the sweep close most of the remaining distance to the ceiling.
    CHECK(ceiling - last < 0.5);

    auto r4 = run_sweep("fig4", opts);
    CHECK(r4.errors.empty());
    for (std::size_t i = 0; i < r4.table.rows(); ++i)
    {
        const double ratio = num(r4.table, i, "ratio");
        CHECK(ratio > 0.0);
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("xp - Sweep outputs")
{
    const fs::path dir = scratch("fig5");
    auto r = cli({"fig5", "--trials", "2", "--seed", "9", "--out", dir.string(), "--threads", "2"});
    INFO(r.err);
    REQUIRE(r.code == 0);
    REQUIRE(fs::exists(dir / "fig5.csv"));
    REQUIRE(fs::exists(dir / "manifest.json"));

    std::ifstream csv(dir / "fig5.csv");
    Table t = Table::read_csv(csv);
    CHECK(t.columns() == rate_columns());
    // Per point: quantized and unquantized rows for MRC and ZFC, every user.
    std::size_t expected = 0;
    for (const auto &p : figure_points("fig5", 9))
        expected += 4 * std::size_t(p.config.K());
    CHECK(t.rows() == expected);
    for (std::size_t i = 0; i < t.rows(); ++i)
    {
        if (num(t, i, "quantized") == 1.0)
        {
            CHECK(num(t, i, "trials") == 2.0);
            CHECK(num(t, i, "stderr") >= 0.0);
            CHECK(std::isfinite(num(t, i, "rate_bpcu")));
        }
        else
            CHECK(text(t, i, "rate_bpcu").empty());
    }

    auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    for (const char *key : {"figure", "seed", "trials", "grid", "config_hash", "rows", "elapsed_s", "version", "threads",
                            "errors", "points"})
        CHECK(m.contains(key));
    CHECK(m["figure"] == "fig5");
    CHECK(m["seed"] == 9);
    CHECK(m["trials"] == 2);
    CHECK(m["rows"] == expected);
    CHECK(m["errors"] == 0);
    CHECK(m["grid"].size() == 20);
    REQUIRE(m["points"].size() == 20);
    CHECK(m["points"][0]["config"]["antennas"] == 128);
    CHECK(m["points"][0]["config_hash"].is_string());

    // The same seed with a different thread count and output format gives identical numbers.
    const fs::path dj = scratch("fig5_json");
    auto rj = cli({"fig5", "--trials", "2", "--seed", "9", "--out", dj.string(), "--threads", "1", "--format", "json"});
    REQUIRE(rj.code == 0);
    auto j = nlohmann::json::parse(slurp(dj / "fig5.json"));
    REQUIRE(j.size() == t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i)
        if (num(t, i, "quantized") == 1.0)
            CHECK(j[i]["rate_bpcu"].get<double>() == num(t, i, "rate_bpcu"));
    fs::remove_all(dir);
    fs::remove_all(dj);
}

TEST_CASE("xp - Thread-count determinism")
{
    const fs::path cfg = scratch("small.json");
    {
        std::ofstream f(cfg);
        f << small_config;
    }
    std::string csv[3];
    int i = 0;
    for (const char *threads : {"1", "2", "5"})
    {
        const fs::path dir = scratch(std::string("det") + threads);
        auto r = cli({"custom", "--config", cfg.string(), "--trials", "12", "--seed", "4", "--threads", threads, "--out",
                      dir.string()});
        REQUIRE(r.code == 0);
        csv[i++] = slurp(dir / "custom.csv");
        fs::remove_all(dir);
    }
    CHECK(csv[0] == csv[1]);
    CHECK(csv[0] == csv[2]);
    CHECK(csv[0].find("zfc") != std::string::npos);

    const fs::path dir = scratch("det_seed");
    auto r = cli({"custom", "--config", cfg.string(), "--trials", "12", "--seed", "5", "--out", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "custom.csv") != csv[0]);
    fs::remove_all(dir);
    fs::remove(cfg);
}

TEST_CASE("xp - Exit codes")
{
    CHECK(cli({"selftest"}).code == 0);
    CHECK(cli({"selftest"}).out.find("selftest passed") != std::string::npos);
    for (const auto &g : golden_suite())
        CHECK(g.pass());

    CHECK(cli({}).code == 2);
    CHECK(cli({"fig5", "--bogus"}).code == 2);
    CHECK(cli({"fig5", "--format", "xml"}).code == 2);
    CHECK(cli({"fig5", "--threads", "0"}).code == 2);
    CHECK(cli({"custom"}).code == 2);
    CHECK(cli({"fig5", "--config", "x.json"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"custom", "--config", "/nonexistent/cfg.json"}).code == 2);

    const fs::path cfg = scratch("bad.json");
    {
        std::ofstream f(cfg);
        f << bad_config;
    }
    auto r = cli({"custom", "--config", cfg.string(), "--out", scratch("bad_out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("PilotTooShort") != std::string::npos);
    CHECK_FALSE(fs::exists(scratch("bad_out") / "custom.csv"));

    // Same through the real executable.
    if (std::getenv("QM_CLI"))
    {
        const std::string log = (fs::temp_directory_path() / "quantmimo_test_xp_log.txt").string();
        CHECK(run_binary("selftest", log) == 0);
        CHECK(slurp(log).find("selftest passed") != std::string::npos);
        CHECK(run_binary("custom --config '" + cfg.string() + "'", log) == 2);
        CHECK(slurp(log).find("PilotTooShort") != std::string::npos);
        CHECK(run_binary("nonsense", log) == 2);
        fs::remove(log);
    }
    fs::remove(cfg);
}
