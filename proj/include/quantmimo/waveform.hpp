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

#ifndef QUANTMIMO_WAVEFORM_HPP
#define QUANTMIMO_WAVEFORM_HPP

#include "quantmimo/common.hpp"
#include "quantmimo/rng.hpp"
#include "quantmimo/sysconfig.hpp"

namespace qm
{
    // Unitary DFT pair, 1/sqrt(N) in both directions. Used for every signal.
    CVec unitary_dft(const CVec &v);
    CVec unitary_idft(const CVec &v);
    void unitary_dft(const cplx *in, cplx *out, int n);
    void unitary_idft(const cplx *in, cplx *out, int n);

    // Row-wise transforms of a signal matrix.
    SigMat unitary_dft_rows(const SigMat &x);
    SigMat unitary_idft_rows(const SigMat &x);

    // Non-unitary forward DFT of a length-L sequence zero padded to N:
    //   out[nu] = sum_l h[l] exp(-j 2 pi l nu / N)
    // This is the channel frequency-response convention. Requires N >= L.
    void dft_zero_padded(const cplx *h, int L, cplx *out, int N);

    struct PilotBook
    {
        RMat phases;      // K x N_p, theta_k[nu]
        SigMat freq;      // K x N_p, phi~_k[nu]
        SigMat time;      // K x N_p, x_k[n] = unitary_idft(sqrt(N_p) phi~_k)
        PhaseMode mode = PhaseMode::Random;

        int K() const { return int(freq.rows()); }
        int length() const { return int(freq.cols()); }
    };

    // Comb pilots: user k (0-based) occupies tones nu with nu mod K == k.
    PilotBook make_pilots(int K, int N_p, const StreamFactory &streams, PhaseMode mode = PhaseMode::Random);

    struct TransmitBlock
    {
        SigMat symbols; // K x N_d, s_k[n]
        SigMat time;    // K x N_d, x_k[n]
        Waveform mode = Waveform::OFDM;

        // Unitary spectrum of the time signal.
        SigMat spectrum() const { return mode == Waveform::OFDM ? symbols : unitary_dft_rows(time); }
    };

    TransmitBlock make_transmit_block(SigMat symbols, Waveform mode);

    // Unit-power symbols from the configured alphabet, one substream per user.
    TransmitBlock draw_data_block(const SystemConfig &config, const StreamFactory &streams);

    // Prepends the last L-1 samples of every row.
    SigMat add_cyclic_prefix(const SigMat &x, int L);

    // Drops the first L-1 samples of every row.
    SigMat strip_cyclic_prefix(const SigMat &y, int L);
}

#endif
