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

#ifndef QUANTMIMO_LINKSIM_HPP
#define QUANTMIMO_LINKSIM_HPP

#include "quantmimo/channel.hpp"
#include "quantmimo/common.hpp"
#include "quantmimo/rng.hpp"
#include "quantmimo/sysconfig.hpp"

namespace qm
{
    struct ReceiveOptions
    {
        bool keep_noise_free = false; // fill ReceivedBlock::ybar
        bool keep_noise = false;      // fill ReceivedBlock::noise
    };

    struct ReceivedBlock
    {
        SigMat y;     // M x N analog samples
        SigMat q;     // M x N quantizer output (or rho y when unquantized)
        SigMat ybar;  // noise-free part sum_k sqrt(beta_k P_k) sum_l h x, optional
        SigMat noise; // z, optional
    };

    // Reference path: direct linear convolution of a block that already carries its cyclic
    // prefix. The channel is silent before the block. Output has the input's length.
    ReceivedBlock propagate(const ChannelRealization &ch, const SigMat &tx_with_cp, const SystemConfig &config,
                            const StreamFactory &streams, Purpose noise_purpose, ReceiveOptions opts = {});

    // Fast path: returns exactly the samples that remain after stripping the prefix from the
    // reference path (same noise draws), computed as per-tone products. H must be the channel
    // response on the block's own grid (N = tx.cols()).
    ReceivedBlock propagate_block(const FrequencyResponse &H, const SigMat &tx, const SystemConfig &config,
                                  const StreamFactory &streams, Purpose noise_purpose, ReceiveOptions opts = {});

    // (sign(Re y) + j sign(Im y)) / sqrt(2), with sign(0) = +1.
    SigMat quantize_one_bit(const SigMat &y);

    // q = quantize_one_bit(y) in quantized mode, q = rho y otherwise.
    SigMat receiver_output(const SystemConfig &config, const SigMat &y, double rho);

    // P_rx[n] = N0 + sum_k beta_k P_k sum_l p[l] |x_k[(n - l) mod N]|^2
    RVec inst_rx_power(const SigMat &x_time, const SystemConfig &config);

    enum class BlockKind
    {
        Pilot,
        Data
    };

    struct SqrtPowerMoment
    {
        double mean = 0.0;   // E[sqrt(P_rx[n])]
        double std_error = 0.0; // batch-means standard error
        long samples = 0;
    };

    // Monte-Carlo estimate of E[sqrt(P_rx[n])] over freshly drawn transmit blocks of the given kind.
    SqrtPowerMoment estimate_sqrt_prx_mean(const SystemConfig &config, BlockKind kind, long samples = 100000,
                                           std::uint64_t seed = 0x5eed);

    double rho_empirical(const SigMat &y, const SigMat &q);
    double rho_closed_form(const SystemConfig &config, const SqrtPowerMoment &moment);
    double rho_limit(const SystemConfig &config);

    // Q' = P_bar (pi/2 - 1) in quantized mode, 0 otherwise.
    double q_limit(const SystemConfig &config);

    struct QuantizerStats
    {
        double rho = 0.0;
        double err_var = 0.0;              // E
        double rel_distortion = 0.0;       // Q = E / rho^2
        double rel_distortion_limit = 0.0; // Q'
        double mean_power = 0.0;           // P_bar
        RVec inst_power;                   // P_rx[n], when a block was supplied
        RVec tau;                          // tau[n], when a block was supplied
    };

    // Closed-form statistics from the cached moment; per-sample fields filled when x_time is given.
    QuantizerStats quantizer_stats(const SystemConfig &config, const SqrtPowerMoment &moment, const SigMat *x_time = nullptr);

    // tau[n] = 1/sqrt(P_rx[n]) - E[sqrt(P_rx)] / P_bar
    RVec tau(const RVec &inst_power, double sqrt_power_mean, double mean_power);

    struct ErrorSample
    {
        SigMat e;
        double variance = 0.0;    // sample variance about the sample mean
        double mean_square = 0.0; // mean |e|^2
    };

    // e = q - rho y
    ErrorSample quantization_error(const SigMat &y, const SigMat &q, double rho);

    struct AmplitudeDecomposition
    {
        SigMat coherent; // sqrt(2/pi) tau[n] ybar_m[n]
        SigMat residual; // d = e - coherent
    };

    AmplitudeDecomposition amplitude_decomposition(const SigMat &e, const SigMat &ybar, const RVec &tau);
}

#endif
