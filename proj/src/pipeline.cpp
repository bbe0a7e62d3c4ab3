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

#include "quantmimo/pipeline.hpp"
#include "quantmimo/channel.hpp"
#include "quantmimo/waveform.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace qm
{
    SimulationSetup prepare_simulation(const SystemConfig &config, std::vector<CombinerKind> combiners, long moment_samples)
    {
        require_valid(config);
        SimulationSetup s;
        s.config = config;
        s.combiners = std::move(combiners);
        if (s.combiners.empty())
            s.combiners.push_back(config.combiner.kind);
        for (auto kind : s.combiners)
            if (kind != CombinerKind::MRC && config.M() < config.K())
                throw Error(ErrorCode::TooFewAntennas, "M < K for " + std::string(to_string(kind)));

        s.data_moment = estimate_sqrt_prx_mean(config, BlockKind::Data, moment_samples, config.seed ^ 0xda7aULL);
        s.rho_data = rho_closed_form(config, s.data_moment);
        if (config.csi == CsiMode::Estimated)
        {
            s.pilot_moment = estimate_sqrt_prx_mean(config, BlockKind::Pilot, moment_samples, config.seed ^ 0x9170ULL);
            s.pilot_stats = prior_scale_stats(config, s.pilot_moment);
        }
        s.quality = config_quality(config);
        s.lambda = config.combiner.lambda ? *config.combiner.lambda : default_rzfc_lambda(config);
        for (auto kind : s.combiners)
        {
            // Full-rank check: the ZFC ensemble mean needs M > K.
            if (kind == CombinerKind::ZFC && config.M() == config.K())
                throw Error(ErrorCode::TooFewAntennas, "zero-forcing normalisation needs M > K");
            s.alpha.push_back(ensemble_alpha(kind, config.M(), s.quality, s.lambda, 4000, config.seed ^ 0xa1faULL));
        }
        return s;
    }

    namespace
    {
        void audit_trial(const SimulationSetup &s, const CombinerWeights &W, const FrequencyResponse &H,
                         const FrequencyResponse &Hhat, const SigMat &X, const ReceivedBlock &rx, const SigMat &q,
                         AuditAccumulator &acc)
        {
            const SystemConfig &c = s.config;
            const int M = c.M(), K = c.K(), N = c.data_len;
            const double rho = s.rho_data;
            const SigMat Z = unitary_dft_rows(rx.noise);
            const SigMat E = unitary_dft_rows(SigMat(q - rho * rx.y));

            std::vector<double> amp(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k)
                amp[std::size_t(k)] = std::sqrt(c.users[std::size_t(k)].rx_power());

            std::vector<std::vector<cplx>> comp(AuditCount, std::vector<cplx>(std::size_t(N)));
            for (int k = 0; k < K; ++k)
            {
                for (int nu = 0; nu < N; ++nu)
                {
                    const cplx *w = W.W.fiber(nu, k);
                    cplx gain = 0.0, cross = 0.0, uu = 0.0, zz = 0.0, ee = 0.0;
                    for (int j = 0; j < K; ++j)
                    {
                        cplx v = 0.0;
                        for (int m = 0; m < M; ++m)
                            v += w[m] * Hhat.values(m, j, nu);
                        // rho sqrt(c_j beta_j P_j) x^'_kj with x^'_kj = v x~_j / sqrt(c_j)
                        const cplx term = rho * amp[std::size_t(j)] * v * X(j, nu);
                        (j == k ? gain : cross) += term;
                    }
                    for (int m = 0; m < M; ++m)
                    {
                        cplx um = 0.0;
                        for (int j = 0; j < K; ++j)
                            um += amp[std::size_t(j)] * (H.values(m, j, nu) - Hhat.values(m, j, nu)) * X(j, nu);
                        uu += w[m] * um;
                        zz += w[m] * Z(m, nu);
                        ee += w[m] * E(m, nu);
                    }
                    comp[AuditSymbol][std::size_t(nu)] = X(k, nu);
                    comp[AuditGain][std::size_t(nu)] = gain;
                    comp[AuditCross][std::size_t(nu)] = cross;
                    comp[AuditEstimation][std::size_t(nu)] = uu;
                    comp[AuditNoise][std::size_t(nu)] = zz;
                    comp[AuditQuantization][std::size_t(nu)] = ee;
                }
                const cplx *ptr[AuditCount];
                for (int i = 0; i < AuditCount; ++i)
                    ptr[i] = comp[std::size_t(i)].data();
                acc.add(k, ptr, N);
            }
        }
    }

    TrialResult simulate_trial(const SimulationSetup &s, const StreamFactory &streams, const TrialOptions &opts)
    {
        const SystemConfig &c = s.config;
        const int K = c.K(), N = c.data_len;
        TrialResult r;
        r.trial = streams.trial();
        r.audit = AuditAccumulator(K);

        const ChannelRealization ch = draw_channel(c, streams);
        const FrequencyResponse H = freq_response(ch, N);

        FrequencyResponse Hhat;
        if (c.csi == CsiMode::Estimated)
        {
            const PilotBook pilots = make_pilots(K, c.pilot_len, streams, c.pilot_phases);
            const ReceivedBlock rxp = propagate_block(freq_response(ch, c.pilot_len), pilots.time, c, streams, Purpose::PilotNoise);
            const SigMat qp = receiver_output(c, rxp.y, s.pilot_stats.rho);
            r.stats = c.estimator_stats == EstimatorStats::Empirical ? empirical_scale_stats(c, rxp.y, qp) : s.pilot_stats;
            ChannelEstimate est = estimate_channel(qp, pilots, c, r.stats);
            Hhat = std::move(est.freq);
            r.estimation_mse = estimation_mse(H, Hhat);
        }
        else
            Hhat = H;
        r.moments.resize(s.combiners.size());
        r.errors.resize(s.combiners.size());
        if (opts.estimation_only)
            return r;

        const TransmitBlock data = draw_data_block(c, streams);
        ReceiveOptions ro;
        ro.keep_noise = opts.audit;
        const ReceivedBlock rx = propagate_block(H, data.time, c, streams, Purpose::DataNoise, ro);
        const SigMat q = receiver_output(c, rx.y, s.rho_data);
        const SigMat Q = unitary_dft_rows(q);
        const SigMat X = data.spectrum();

        for (std::size_t i = 0; i < s.combiners.size(); ++i)
        {
            try
            {
                const SigMat Xhat = combine_freq(Hhat, s.combiners[i], s.lambda, s.alpha[i], Q);
                for (int k = 0; k < K; ++k)
                    r.moments[i].push_back(UserMoments::from_samples(X.row(k).data(), Xhat.row(k).data(), N));
                if (i == 0 && opts.audit)
                {
                    const CombinerWeights W =
                        build_combiner(Hhat, s.combiners[i], s.lambda, Normalization::Ensemble, &s.alpha[i]);
                    audit_trial(s, W, H, Hhat, X, rx, q, r.audit);
                }
                if (i == 0 && opts.keep_symbols)
                {
                    r.symbols = data.symbols;
                    r.estimates = c.waveform == Waveform::OFDM ? Xhat : unitary_idft_rows(Xhat);
                }
            }
            catch (const Error &e)
            {
                if (e.code() != ErrorCode::SingularGram)
                    throw;
                r.errors[i] = e.what();
                r.moments[i].clear();
            }
        }
        return r;
    }

    SimulationResult run_trials(const SimulationSetup &setup, std::uint64_t seed, std::uint64_t point, int trials,
                                int threads, const TrialOptions &opts)
    {
        if (trials < 1)
            throw Error(ErrorCode::InvalidArgument, "at least one trial is required");
        threads = std::max(1, std::min(threads, trials));
        std::vector<TrialResult> results(static_cast<std::size_t>(trials));
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_lock;

        auto worker = [&]
        {
            for (;;)
            {
                const int t = next.fetch_add(1);
                if (t >= trials)
                    return;
                try
                {
                    results[std::size_t(t)] = simulate_trial(setup, StreamFactory(seed, point, std::uint64_t(t)), opts);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> g(failure_lock);
                    if (!failure)
                        failure = std::current_exception();
                    next = trials;
                }
            }
        };
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }
        if (failure)
            std::rethrow_exception(failure);

        SimulationResult out;
        out.moments.resize(setup.combiners.size());
        out.errors.resize(setup.combiners.size());
        out.audit = AuditAccumulator(setup.config.K());
        for (auto &r : results)
        {
            for (std::size_t i = 0; i < setup.combiners.size(); ++i)
            {
                if (opts.estimation_only)
                    continue;
                if (r.errors[i].empty())
                    out.moments[i].add_trial(r.trial, r.moments[i]);
                else
                {
                    out.moments[i].count_aborted();
                    out.errors[i].push_back("trial " + std::to_string(r.trial) + ": " + r.errors[i]);
                }
            }
            if (opts.audit)
                out.audit.merge(r.audit);
            if (r.estimation_mse.size() > 0)
                out.estimation_mse.push_back(r.estimation_mse);
            if (opts.keep_symbols)
                out.kept.push_back(std::move(r));
        }
        return out;
    }

    MeanSe mean_and_se(const std::vector<double> &v)
    {
        MeanSe r;
        const double n = double(v.size());
        if (n < 1)
            return r;
        for (double x : v)
            r.mean += x;
        r.mean /= n;
        if (n < 2)
            return r;
        double ss = 0.0;
        for (double x : v)
            ss += (x - r.mean) * (x - r.mean);
        r.std_error = std::sqrt(ss / (n - 1.0) / n);
        return r;
    }
}
