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

#ifndef QUANTMIMO_COMBINE_HPP
#define QUANTMIMO_COMBINE_HPP

#include "quantmimo/channel.hpp"
#include "quantmimo/common.hpp"
#include "quantmimo/sysconfig.hpp"

#include <cstdint>

namespace qm
{
    enum class Normalization
    {
        PerRealization, // alpha_k = tone average of the row energy of this realization
        Ensemble,       // alpha_k supplied by the caller (expected row energy)
        None            // alpha_k = 1
    };

    struct CombinerWeights
    {
        Tensor3 W; // N x K x M, w~_km[nu]
        RVec alpha;
        CombinerKind kind = CombinerKind::MRC;
        double lambda = 0.0;

        int N() const { return W.dim0(); }
        int K() const { return W.dim1(); }
        int M() const { return W.dim2(); }
    };

    inline constexpr double max_gram_condition = 1e12;

    // MRC: H^H; ZFC: (H^H H)^-1 H^H; RZFC: (H^H H + lambda I)^-1 H^H, per tone, rows scaled by
    // 1/sqrt(alpha_k). Throws SingularGram when a Gram matrix is too badly conditioned.
    CombinerWeights build_combiner(const FrequencyResponse &H, CombinerKind kind, double lambda = 0.0,
                                   Normalization norm = Normalization::PerRealization, const RVec *alpha = nullptr);

    // Expected row energy of the unnormalised combiner for H with independent CN(0, c_k) columns.
    // Closed form for MRC (M c_k) and ZFC (1 / ((M - K) c_k)), Monte Carlo for RZFC.
    RVec ensemble_alpha(CombinerKind kind, int M, const RVec &c, double lambda = 0.0, int samples = 2000,
                        std::uint64_t seed = 0xa1fa);

    // K (N0 + Q') / sum_k beta_k P_k
    double default_rzfc_lambda(const SystemConfig &config);

    // Lambda actually used for the configured combiner.
    double resolve_lambda(const SystemConfig &config);

    // x^~_k[nu] = sum_m w~_km[nu] q~_m[nu]; q_freq is M x N.
    SigMat apply_freq(const CombinerWeights &w, const SigMat &q_freq);

    // apply_freq(build_combiner(H, kind, lambda, Ensemble, &alpha), q_freq) without forming the
    // weights: x^~[nu] = (G + lambda I)^-1 H^H q~[nu] / sqrt(alpha). Same SingularGram check.
    SigMat combine_freq(const FrequencyResponse &H, CombinerKind kind, double lambda, const RVec &alpha,
                        const SigMat &q_freq);

    // Cyclic convolution of the time-domain block with the combiner impulse response.
    SigMat apply_time(const CombinerWeights &w, const SigMat &q_time);

    // s^ in the waveform's symbol domain from a prefix-stripped receiver block.
    SigMat symbol_estimates(Waveform mode, const CombinerWeights &w, const SigMat &q_time);

    // w_km[l] = (1/N) sum_nu w~_km[nu] exp(j 2 pi nu l / N); dims K x M x N.
    Tensor3 impulse_response(const CombinerWeights &w);

    struct EnergyProfile
    {
        RVec tap_energy;            // summed over users and antennas
        double window_fraction = 0; // energy fraction in the best cyclic window
        int window_start = 0;
    };

    EnergyProfile energy_profile(const Tensor3 &impulse, int window);
}

#endif
