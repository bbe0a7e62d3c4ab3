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

#ifndef QUANTMIMO_CHANNEL_HPP
#define QUANTMIMO_CHANNEL_HPP

#include "quantmimo/common.hpp"
#include "quantmimo/rng.hpp"
#include "quantmimo/sysconfig.hpp"

#include <iosfwd>
#include <string>

namespace qm
{
    // Small-scale taps h_mk[l], dims (M, K, L). The large-scale gain is kept in the config.
    struct ChannelRealization
    {
        Tensor3 taps;

        int M() const { return taps.dim0(); }
        int K() const { return taps.dim1(); }
        int L() const { return taps.dim2(); }
    };

    // h~_mk[nu], dims (M, K, N)
    struct FrequencyResponse
    {
        Tensor3 values;

        int M() const { return values.dim0(); }
        int K() const { return values.dim1(); }
        int N() const { return values.dim2(); }
    };

    // IID CN(0, p[l]) taps; antenna m uses its own substream of the trial.
    ChannelRealization draw_channel(const SystemConfig &config, const StreamFactory &streams);

    // Non-unitary forward DFT of the zero-padded taps along the last axis.
    FrequencyResponse freq_response(const Tensor3 &taps, int N);
    inline FrequencyResponse freq_response(const ChannelRealization &ch, int N) { return freq_response(ch.taps, N); }

    // Binary fixture format, little endian:
    //   char[4] "QMCH", uint32 version (1), uint32 M, uint32 K, uint32 L,
    //   then M*K*L interleaved (re, im) float64 pairs, l fastest.
    void write_channel_dump(std::ostream &out, const ChannelRealization &ch);
    ChannelRealization read_channel_dump(std::istream &in);
    void save_channel(const std::string &path, const ChannelRealization &ch);
    ChannelRealization load_channel(const std::string &path);
}

#endif
