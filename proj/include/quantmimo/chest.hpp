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

#ifndef QUANTMIMO_CHEST_HPP
#define QUANTMIMO_CHEST_HPP

#include "quantmimo/channel.hpp"
#include "quantmimo/common.hpp"
#include "quantmimo/linksim.hpp"
#include "quantmimo/sysconfig.hpp"
#include "quantmimo/waveform.hpp"

namespace qm
{
    // Quantizer statistics the estimator is told about: rho and E, with Q = E / rho^2.
    struct ScaleStats
    {
        double rho = 1.0;
        double err_var = 0.0;

        double rel_distortion() const { return err_var / (rho * rho); }
    };

    // Statistics for the Statistical and Limit modes (Empirical is resolved per trial).
    ScaleStats prior_scale_stats(const SystemConfig &config, const SqrtPowerMoment &pilot_moment);

    // Per-trial rho-hat and E-hat from the pilot block.
    ScaleStats empirical_scale_stats(const SystemConfig &config, const SigMat &y, const SigMat &q);

    // h'_mk[l] = sqrt(K/N_p) sum over user k's comb tones of q~[nu] exp(j 2 pi l nu / N_p) exp(-j theta_k[nu]),
    // for l < L. q_freq is the unitary DFT of the prefix-stripped pilot block, M x N_p.
    Tensor3 raw_observation(const SigMat &q_freq, const PilotBook &pilots, int L);

    struct TapScale
    {
        double scale = 0.0;   // h_hat = scale * h'
        double quality = 0.0; // c_k[l]
    };

    TapScale lmmse_scale(const SystemConfig &config, int l, int k, const ScaleStats &stats);

    struct ChannelEstimate
    {
        Tensor3 taps;           // M x K x L
        RMat per_tap_quality;   // K x L
        RVec quality;           // c_k
        FrequencyResponse freq; // M x K x N_d, non-unitary DFT of the taps
        ScaleStats stats;
    };

    // q_time: prefix-stripped pilot block at the receiver output, M x N_p.
    ChannelEstimate estimate_channel(const SigMat &q_time, const PilotBook &pilots, const SystemConfig &config,
                                     const ScaleStats &stats);

    // Mean |h~ - h^~|^2 per user over antennas and tones.
    RVec estimation_mse(const FrequencyResponse &truth, const FrequencyResponse &estimate);

    // Closed-form c_k[l] = p beta P N_p / (p beta P N_p + N0 + Q), K x L.
    RMat per_tap_quality(const SystemConfig &config, double Q);

    // c_k = sum_l c_k[l] p[l]
    RVec user_quality(const SystemConfig &config, double Q);

    // Quality with the quantizer's limit distortion Q' (0 when unquantized).
    RVec user_quality(const SystemConfig &config);

    // Ratio of the unquantized c_k at mu0 to the quantized c_k at muq, same scenario otherwise.
    double quality_ratio(double mu0, double muq, const SystemConfig &config, int user = 0);
}

#endif
