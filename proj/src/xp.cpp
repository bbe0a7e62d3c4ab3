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

#include "quantmimo/xp.hpp"
#include "quantmimo/chest.hpp"
#include "quantmimo/pipeline.hpp"
#include "quantmimo/rates.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#ifndef QUANTMIMO_VERSION
#define QUANTMIMO_VERSION "0.1.0"
#endif

namespace qm
{
    namespace
    {
        const std::vector<int> fig5_taps = {1, 2, 3, 4, 5, 6, 10, 15, 20, 30};
        const std::vector<int> fig6_antennas = {8, 11, 16, 32, 64, 128, 256, 512, 1024};
        constexpr int empirical_max_antennas = 256; // Monte-Carlo markers above this are closed form only
        constexpr int wideband_taps = 20;           // N_p = K L = 100 for K = 5

        double db(double x) { return 10.0 * std::log10(x); }

        SystemConfig with_seed(SystemConfig c, std::uint64_t seed)
        {
            c.seed = seed;
            return c;
        }

        // Weak user 0 at -10 dB, interferers at 0 dB.
        SystemConfig weak_user_config(int M, int L)
        {
            SystemConfig c = make_equal_power_config(M, 5, L, 0.0, 1, CombinerKind::MRC);
            c.users[0].power = 0.1;
            return c;
        }

        std::string series_name(const SweepPoint &p) { return p.scenario; }

        struct RateRow
        {
            const SweepPoint *point;
            int user;
            CombinerKind kind;
            bool quantized;
            std::optional<double> rate, std_error, ratio;
            double limit;
            int trials;
        };

        void add_rate_row(Table &t, const RateRow &r)
        {
            const SystemConfig &c = r.point->config;
            const double snr = db(c.users[std::size_t(r.user)].snr(c.noise_floor));
            auto opt = [](const std::optional<double> &v) -> Cell
            { return v ? Cell(*v) : Cell(); };
            t.add_row({r.point->variable, r.point->value, (long long)r.user, std::string(to_string(r.kind)),
                       (long long)r.quantized, std::string(to_string(c.waveform)), opt(r.rate), r.limit, opt(r.std_error),
                       (long long)r.trials, (long long)c.M(), (long long)c.K(), (long long)c.L(), snr,
                       series_name(*r.point), opt(r.ratio)});
        }

        std::vector<CombinerKind> point_combiners(const std::string &figure, const SweepPoint &p)
        {
            if (figure == "fig5" || figure == "fig8")
                return {CombinerKind::MRC, CombinerKind::ZFC};
            if (figure == "fig6" || figure == "fig7")
                return {CombinerKind::MRC, CombinerKind::ZFC, CombinerKind::RZFC};
            if (figure == "fig3")
                return {CombinerKind::ZFC};
            return {p.config.combiner.kind};
        }

        bool point_is_empirical(const std::string &figure, const SweepPoint &p)
        {
            if (figure == "fig4" || figure == "fig8")
                return false;
            if (figure == "fig6" || figure == "fig7")
                return p.config.M() <= empirical_max_antennas;
            return true;
        }

        void rate_point(const std::string &figure, const SweepPoint &p, int index, const RunOptions &opts, int trials,
                        SweepResult &out, nlohmann::ordered_json &info)
        {
            const SystemConfig &c = p.config;
            const auto kinds = point_combiners(figure, p);
            const int K = c.K();

            // Closed-form limits for both quantizer settings.
            std::map<std::pair<int, bool>, RVec> limit;
            for (auto kind : kinds)
                for (bool quantized : {true, false})
                {
                    SystemConfig s = c;
                    s.quantized = quantized;
                    if (kind != CombinerKind::RZFC || quantized)
                        limit[{int(kind), quantized}] = closed_form_rate(s, kind);
                }

            if (figure == "fig4")
            {
                // Reference: unquantized, mu0 = 1.
                SystemConfig ref = c;
                ref.quantized = false;
                ref.pilot_len = c.K() * c.L();
                for (auto kind : kinds)
                {
                    const RVec r0 = closed_form_rate(ref, kind);
                    const RVec &rq = limit[{int(kind), true}];
                    for (int k = 0; k < K; ++k)
                        add_rate_row(out.table, {&p, k, kind, true, std::nullopt, std::nullopt, rq(k) / r0(k), rq(k), 0});
                }
                return;
            }

            std::vector<std::optional<RateEstimate>> empirical(kinds.size() * std::size_t(K));
            int used = 0;
            if (point_is_empirical(figure, p) && trials > 0)
            {
                SystemConfig q = c;
                q.quantized = true;
                const SimulationSetup setup = prepare_simulation(q, kinds);
                const SimulationResult sim = run_trials(setup, opts.seed, std::uint64_t(index), trials, opts.threads);
                used = trials;
                nlohmann::ordered_json aborted = nlohmann::ordered_json::object();
                for (std::size_t i = 0; i < kinds.size(); ++i)
                {
                    aborted[to_string(kinds[i])] = sim.moments[i].aborted();
                    for (const auto &e : sim.errors[i])
                        out.errors.push_back({index, ErrorCode::SingularGram, e});
                    for (int k = 0; k < K; ++k)
                    {
                        try
                        {
                            empirical[i * std::size_t(K) + std::size_t(k)] = empirical_rate(sim.moments[i], k);
                        }
                        catch (const Error &e)
                        {
                            out.errors.push_back({index, e.code(), std::string(to_string(kinds[i])) + " user " +
                                                                        std::to_string(k) + ": " + e.what()});
                        }
                    }
                }
                info["aborted_trials"] = aborted;
            }

            for (std::size_t i = 0; i < kinds.size(); ++i)
                for (int k = 0; k < K; ++k)
                {
                    const auto &e = empirical[i * std::size_t(K) + std::size_t(k)];
                    RateRow row{&p, k, kinds[i], true, std::nullopt, std::nullopt, std::nullopt,
                                limit[{int(kinds[i]), true}](k), e ? e->trials : used};
                    if (e)
                    {
                        row.rate = e->rate;
                        row.std_error = e->std_error;
                    }
                    add_rate_row(out.table, row);
                }
            for (auto kind : kinds)
                if (kind != CombinerKind::RZFC)
                    for (int k = 0; k < K; ++k)
                        add_rate_row(out.table, {&p, k, kind, false, std::nullopt, std::nullopt, std::nullopt,
                                                 limit[{int(kind), false}](k), 0});
            if (figure == "fig8")
            {
                SweepPoint ceiling = p;
                ceiling.scenario = "ceiling";
                for (int k = 0; k < K; ++k)
                    add_rate_row(out.table, {&ceiling, k, CombinerKind::ZFC, true,
                                             std::nullopt, std::nullopt, std::nullopt, rate_ceiling(c, k), 0});
            }
        }

        void quality_point(const SweepPoint &p, int index, const RunOptions &opts, int trials, SweepResult &out)
        {
            const SystemConfig &c = p.config;
            const RVec analytic = c.quantized ? user_quality(c) : user_quality(c, 0.0);
            std::optional<double> emp_db, se_db;
            if (trials > 0)
            {
                const SimulationSetup setup = prepare_simulation(c, {CombinerKind::MRC});
                TrialOptions to;
                to.estimation_only = true;
                const SimulationResult sim = run_trials(setup, opts.seed, std::uint64_t(index), trials, opts.threads, to);
                std::vector<double> per_trial;
                for (const RVec &mse : sim.estimation_mse)
                    per_trial.push_back(1.0 - mse.mean());
                const MeanSe m = mean_and_se(per_trial);
                if (m.mean > 0.0)
                {
                    emp_db = db(m.mean);
                    se_db = 10.0 / std::log(10.0) * m.std_error / m.mean;
                }
                else
                    out.errors.push_back({index, ErrorCode::DegenerateMoments, "empirical quality is not positive"});
            }
            auto opt = [](const std::optional<double> &v) -> Cell
            { return v ? Cell(*v) : Cell(); };
            out.table.add_row({c.mu(), (long long)c.K(), db(c.users[0].snr(c.noise_floor)), (long long)c.quantized,
                               db(analytic(0)), opt(emp_db), opt(se_db)});
        }

        void scatter_point(const SweepPoint &p, int index, const RunOptions &opts, int trials, SweepResult &out)
        {
            const SystemConfig &c = p.config;
            const SimulationSetup setup = prepare_simulation(c, {CombinerKind::ZFC});
            TrialOptions to;
            to.keep_symbols = true;
            const SimulationResult sim = run_trials(setup, opts.seed, std::uint64_t(index), trials, opts.threads, to);
            for (const auto &e : sim.errors[0])
                out.errors.push_back({index, ErrorCode::SingularGram, e});
            const std::string mode = c.waveform == Waveform::OFDM ? "ofdm" : "sc";
            for (const auto &r : sim.kept)
            {
                if (r.estimates.size() == 0)
                    continue;
                const long N = long(r.estimates.cols());
                for (int k = 0; k < c.K(); ++k)
                    for (long n = 0; n < N; ++n)
                    {
                        const cplx s = r.estimates(k, n);
                        out.table.add_row({(long long)k, (long long)(long(r.trial) * N + n), s.real(), s.imag(), mode,
                                           (long long)c.L(), (long long)c.K()});
                    }
            }
        }
    }

    const std::vector<std::string> &figure_ids()
    {
        static const std::vector<std::string> ids = {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "custom"};
        return ids;
    }

    int default_trials(const std::string &figure)
    {
        // Chosen so the jackknife standard error at the slowest point stays below half the
        // acceptance tolerance of the corresponding Monte-Carlo comparison.
        if (figure == "fig2")
            return 20;
        if (figure == "fig3")
            return 1;
        if (figure == "fig4" || figure == "fig8")
            return 0;
        if (figure == "fig5")
            return 200;
        if (figure == "fig6" || figure == "fig7")
            return 50;
        if (figure == "custom")
            return 100;
        throw Error(ErrorCode::InvalidArgument, "unknown figure '" + figure + "'");
    }

    const std::vector<std::string> &rate_columns()
    {
        static const std::vector<std::string> c = {"sweep_var", "value", "user", "combiner", "quantized", "waveform",
                                                   "rate_bpcu", "rate_limit_bpcu", "stderr", "trials", "M", "K", "L",
                                                   "snr_db", "scenario", "ratio"};
        return c;
    }

    const std::vector<std::string> &quality_columns()
    {
        static const std::vector<std::string> c = {"mu", "K", "snr_db", "quantized", "c_k_db_analytic",
                                                   "c_k_db_empirical", "stderr"};
        return c;
    }

    const std::vector<std::string> &scatter_columns()
    {
        static const std::vector<std::string> c = {"user", "symbol_index", "re", "im", "mode", "L", "K"};
        return c;
    }

    std::vector<SweepPoint> figure_points(const std::string &figure, std::uint64_t seed, const SystemConfig *base)
    {
        std::vector<SweepPoint> pts;
        if (figure == "fig2")
        {
            for (int K : {5, 10})
                for (double snr : {-10.0, 0.0, 10.0})
                    for (bool quantized : {true, false})
                        for (int mu = 1; mu <= 40; ++mu)
                        {
                            SystemConfig c = make_equal_power_config(8, K, 4, snr, mu, CombinerKind::MRC);
                            c.quantized = quantized;
                            c.data_len = 64;
                            pts.push_back({"mu", double(mu), (quantized ? "quantized" : "unquantized"), with_seed(c, seed)});
                        }
        }
        else if (figure == "fig3")
        {
            for (int L : {64, 1})
                for (Waveform w : {Waveform::SingleCarrier, Waveform::OFDM})
                {
                    SystemConfig c = make_equal_power_config(128, 5, L, 0.0, 1, CombinerKind::ZFC, 0.0);
                    for (auto &u : c.users)
                        u = {1.0, 1.0};
                    c.csi = CsiMode::Perfect;
                    c.alphabet = Alphabet::QAM16;
                    c.waveform = w;
                    pts.push_back({"L", double(L), L > 1 ? "wideband" : "narrowband", with_seed(c, seed)});
                }
        }
        else if (figure == "fig4")
        {
            const std::vector<std::pair<int, double>> series = {{5, -5.0}, {5, 0.0}, {30, -10.0}, {30, 10.0}};
            for (auto [K, snr] : series)
                for (CombinerKind kind : {CombinerKind::MRC, CombinerKind::ZFC})
                    for (int mu = 1; mu <= 15; ++mu)
                    {
                        SystemConfig c = make_equal_power_config(128, K, 1, snr, mu, kind);
                        pts.push_back({"mu_q", double(mu), std::string(to_string(kind)) + "_K" + std::to_string(K),
                                       with_seed(c, seed)});
                    }
        }
        else if (figure == "fig5")
        {
            for (int K : {5, 30})
                for (int L : fig5_taps)
                {
                    SystemConfig c = make_equal_power_config(128, K, L, 10.0, 1, CombinerKind::MRC);
                    c.csi = CsiMode::Perfect;
                    pts.push_back({"L", double(L), "K" + std::to_string(K), with_seed(c, seed)});
                }
        }
        else if (figure == "fig6" || figure == "fig7")
        {
            const bool low = figure == "fig7";
            for (int M : fig6_antennas)
            {
                SystemConfig c = make_equal_power_config(M, 5, wideband_taps, low ? -10.0 : 10.0, 1, CombinerKind::MRC);
                pts.push_back({"M", double(M), "equal_snr", with_seed(c, seed)});
            }
            if (low)
                for (int M : fig6_antennas)
                    pts.push_back({"M", double(M), "weak_user", with_seed(weak_user_config(M, wideband_taps), seed)});
        }
        else if (figure == "fig8")
        {
            for (int snr = -20; snr <= 10; ++snr)
            {
                SystemConfig c = make_equal_power_config(128, 5, wideband_taps, double(snr), 1, CombinerKind::ZFC);
                pts.push_back({"snr_db", double(snr), "equal_snr", with_seed(c, seed)});
            }
        }
        else if (figure == "custom")
        {
            if (!base)
                throw Error(ErrorCode::InvalidArgument, "the custom figure needs a configuration");
            SystemConfig c = *base;
            c.seed = seed;
            pts.push_back({"custom", 0.0, "custom", c});
        }
        else
            throw Error(ErrorCode::InvalidArgument, "unknown figure '" + figure + "'");
        return pts;
    }

    SweepResult run_sweep(const std::string &figure, const RunOptions &opts, const SystemConfig *base)
    {
        const auto t0 = std::chrono::steady_clock::now();
        SweepResult out;
        out.figure = figure;
        out.trials = opts.trials ? *opts.trials : default_trials(figure);
        if (out.trials < 0)
            throw Error(ErrorCode::InvalidArgument, "trials must be nonnegative");
        out.points = figure_points(figure, opts.seed, base);
        if (out.points.empty())
            throw Error(ErrorCode::EmptyInput, "empty grid");
        for (const auto &p : out.points)
        {
            require_valid(p.config);
            if (out.grid.empty() || out.grid.back() != p.value)
                out.grid.push_back(p.value);
        }

        const bool quality = figure == "fig2", scatter = figure == "fig3";
        out.table = Table(quality ? quality_columns() : scatter ? scatter_columns() : rate_columns());

        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < out.points.size(); ++i)
        {
            const SweepPoint &p = out.points[i];
            const std::size_t before = out.errors.size();
            nlohmann::ordered_json info;
            info["index"] = i;
            info["variable"] = p.variable;
            info["value"] = p.value;
            info["scenario"] = p.scenario;
            try
            {
                if (quality)
                    quality_point(p, int(i), opts, out.trials, out);
                else if (scatter)
                    scatter_point(p, int(i), opts, std::max(1, out.trials), out);
                else
                    rate_point(figure, p, int(i), opts, out.trials, out, info);
            }
            catch (const Error &e)
            {
                out.errors.push_back({int(i), e.code(), e.what()});
            }
            nlohmann::ordered_json errs = nlohmann::ordered_json::array();
            for (std::size_t e = before; e < out.errors.size(); ++e)
                errs.push_back({{"code", error_name(out.errors[e].code)}, {"message", out.errors[e].message}});
            info["errors"] = errs;
            info["config_hash"] = config_hash(p.config);
            info["config"] = config_to_json(p.config);
            points.push_back(std::move(info));
        }
        out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        auto &m = out.manifest;
        m["figure"] = figure;
        m["seed"] = opts.seed;
        m["trials"] = out.trials;
        m["grid"] = out.grid;
        m["config_hash"] = config_hash(out.points.front().config);
        m["rows"] = out.table.rows();
        m["elapsed_s"] = out.elapsed_s;
        m["version"] = version_string();
        m["threads"] = opts.threads;
        m["errors"] = out.errors.size();
        m["points"] = std::move(points);
        return out;
    }

    void write_sweep(const SweepResult &r, const std::string &dir, OutputFormat format)
    {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
        const fs::path table = fs::path(dir) / (r.figure + (format == OutputFormat::Csv ? ".csv" : ".json"));
        std::ofstream t(table, std::ios::binary);
        if (!t)
            throw Error(ErrorCode::Io, "cannot write '" + table.string() + "'");
        if (format == OutputFormat::Csv)
            r.table.write_csv(t);
        else
            r.table.write_json(t);
        const fs::path manifest = fs::path(dir) / "manifest.json";
        std::ofstream m(manifest, std::ios::binary);
        if (!m)
            throw Error(ErrorCode::Io, "cannot write '" + manifest.string() + "'");
        m << r.manifest.dump(1) << '\n';
    }

    std::string version_string() { return QUANTMIMO_VERSION; }

    bool GoldenCheck::pass() const { return std::abs(value - expected) <= tolerance; }

    std::vector<GoldenCheck> golden_suite()
    {
        std::vector<GoldenCheck> g;
        SystemConfig c = make_equal_power_config(128, 5, 1, 10.0, 1, CombinerKind::MRC);
        const double cq = user_quality(c)(0);
        SystemConfig u = c;
        u.quantized = false;
        const double cu = user_quality(u, 0.0)(0);
        g.push_back({"c_k dB, quantized, mu=1, K=5, 10 dB", db(cq), -2.0472004879207, 1e-6});
        g.push_back({"c_k dB, unquantized, mu=1, K=5, 10 dB", db(cu), -0.0860017176191763, 1e-6});
        g.push_back({"c_k, quantized (4 digits)", cq, 0.6241, 5e-5});
        g.push_back({"c_k, unquantized (4 digits)", cu, 0.9804, 5e-5});
        {
            SystemConfig c40 = make_equal_power_config(128, 5, 1, 10.0, 40, CombinerKind::MRC);
            g.push_back({"c_k dB, quantized, mu=40", db(user_quality(c40)(0)), -0.0648970587581807, 1e-6});
        }
        const double delta = quality_ratio(1.0, 1.0, c);
        g.push_back({"Delta(1,1)", delta, pi / 2.0, 1e-12});

        SystemConfig p = c;
        p.csi = CsiMode::Perfect;
        g.push_back({"quantized MRC limit, M=128, K=5, 10 dB", closed_form_rate(p, CombinerKind::MRC)(0), 4.0857, 1e-3});
        g.push_back({"quantized ZFC limit, M=128, K=5, 10 dB", closed_form_rate(p, CombinerKind::ZFC)(0), 5.387, 1e-3});
        SystemConfig pu = p;
        pu.quantized = false;
        g.push_back({"unquantized MRC, M=128, K=5, 10 dB", closed_form_rate(pu, CombinerKind::MRC)(0), 4.706, 1e-3});
        g.push_back({"loss factor, Delta=1", loss_factor(1.0), 2.0 / pi, 1e-9});
        g.push_back({"loss factor, mu_q=mu_0=1", loss_factor(delta), 4.0 / (pi * pi), 1e-9});
        return g;
    }
}
