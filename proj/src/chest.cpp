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

#include "quantmimo/chest.hpp"

#include <cmath>
#include <vector>

namespace qm
{
    ScaleStats prior_scale_stats(const SystemConfig &config, const SqrtPowerMoment &pilot_moment)
    {
        ScaleStats s;
        s.rho = config.estimator_stats == EstimatorStats::Limit ? rho_limit(config) : rho_closed_form(config, pilot_moment);
        s.err_var = s.rho * s.rho * q_limit(config);
        return s;
    }

    ScaleStats empirical_scale_stats(const SystemConfig &config, const SigMat &y, const SigMat &q)
    {
        ScaleStats s;
        s.rho = rho_empirical(y, q);
        s.err_var = config.quantized ? quantization_error(y, q, s.rho).mean_square : 0.0;
        return s;
    }

    Tensor3 raw_observation(const SigMat &q_freq, const PilotBook &pilots, int L)
    {
        const int M = int(q_freq.rows()), N_p = int(q_freq.cols()), K = pilots.K();
        if (pilots.length() != N_p)
            throw Error(ErrorCode::DimensionMismatch, "pilot book length differs from the observation");
        if (N_p % K != 0)
            throw Error(ErrorCode::PilotNotCombAligned, "observation length is not a multiple of K");
        if (N_p < K * L)
            throw Error(ErrorCode::PilotTooShort, "N_p < K L");

        Tensor3 h(M, K, L);
        std::vector<cplx> v(static_cast<std::size_t>(N_p)), t(static_cast<std::size_t>(N_p));
        const double s = std::sqrt(double(K));
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
            {
                std::fill(v.begin(), v.end(), cplx(0.0));
                for (int nu = k; nu < N_p; nu += K)
                    v[std::size_t(nu)] = q_freq(m, nu) * std::polar(1.0, -pilots.phases(k, nu));
                unitary_idft(v.data(), t.data(), N_p);
                for (int l = 0; l < L; ++l)
                    h(m, k, l) = s * t[std::size_t(l)];
            }
        return h;
    }

    TapScale lmmse_scale(const SystemConfig &config, int l, int k, const ScaleStats &st)
    {
        const double p = config.pdp.taps[std::size_t(l)];
        const double a = config.users[std::size_t(k)].rx_power() * double(config.pilot_len);
        const double r2 = st.rho * st.rho;
        TapScale t;
        t.scale = st.rho * p * std::sqrt(a) / (r2 * p * a + r2 * config.noise_floor + st.err_var);
        t.quality = p * a / (p * a + config.noise_floor + st.rel_distortion());
        return t;
    }

    ChannelEstimate estimate_channel(const SigMat &q_time, const PilotBook &pilots, const SystemConfig &config,
                                     const ScaleStats &stats)
    {
        const int K = config.K(), L = config.L();
        ChannelEstimate est;
        est.stats = stats;
        est.taps = raw_observation(unitary_dft_rows(q_time), pilots, L);
        est.per_tap_quality = RMat(K, L);
        est.quality = RVec::Zero(K);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
            {
                const TapScale t = lmmse_scale(config, l, k, stats);
                est.per_tap_quality(k, l) = t.quality;
                est.quality(k) += t.quality * config.pdp.taps[std::size_t(l)];
                for (int m = 0; m < est.taps.dim0(); ++m)
                    est.taps(m, k, l) *= t.scale;
            }
        est.freq = freq_response(est.taps, config.data_len);
        return est;
    }

    RVec estimation_mse(const FrequencyResponse &truth, const FrequencyResponse &estimate)
    {
        const int M = truth.M(), K = truth.K(), N = truth.N();
        if (estimate.M() != M || estimate.K() != K || estimate.N() != N)
            throw Error(ErrorCode::DimensionMismatch, "channel responses differ in shape");
        RVec mse = RVec::Zero(K);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
            {
                const cplx *a = truth.values.fiber(m, k), *b = estimate.values.fiber(m, k);
                for (int nu = 0; nu < N; ++nu)
                    mse(k) += std::norm(a[nu] - b[nu]);
            }
        return mse / double(M * N);
    }

    RMat per_tap_quality(const SystemConfig &config, double Q)
    {
        const int K = config.K(), L = config.L();
        RMat c(K, L);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
            {
                const double g = config.pdp.taps[std::size_t(l)] * config.users[std::size_t(k)].rx_power() * double(config.pilot_len);
                c(k, l) = g / (g + config.noise_floor + Q);
            }
        return c;
    }

    RVec user_quality(const SystemConfig &config, double Q)
    {
        const RMat c = per_tap_quality(config, Q);
        const Eigen::Map<const RVec> p(config.pdp.taps.data(), config.L());
        return c * p;
    }

    RVec user_quality(const SystemConfig &config)
    {
        return user_quality(config, q_limit(config));
    }

    double quality_ratio(double mu0, double muq, const SystemConfig &config, int user)
    {
        const int KL = config.K() * config.L();
        SystemConfig unq = config, quant = config;
        unq.quantized = false;
        unq.pilot_len = int(std::lround(mu0 * KL));
        quant.quantized = true;
        quant.pilot_len = int(std::lround(muq * KL));
        return user_quality(unq, 0.0)(user) / user_quality(quant)(user);
    }
}
