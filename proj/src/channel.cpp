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

#include "quantmimo/channel.hpp"
#include "quantmimo/waveform.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace qm
{
    ChannelRealization draw_channel(const SystemConfig &config, const StreamFactory &streams)
    {
        const int M = config.M(), K = config.K(), L = config.L();
        ChannelRealization ch{Tensor3(M, K, L)};
        for (int m = 0; m < M; ++m)
        {
            Rng rng = streams.stream(Purpose::Channel, std::uint64_t(m));
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < L; ++l)
                    ch.taps(m, k, l) = complex_normal(rng, config.pdp.taps[std::size_t(l)]);
        }
        return ch;
    }

    FrequencyResponse freq_response(const Tensor3 &taps, int N)
    {
        const int M = taps.dim0(), K = taps.dim1(), L = taps.dim2();
        if (N < L)
            throw Error(ErrorCode::InvalidArgument, "frequency grid N = " + std::to_string(N) + " shorter than L = " + std::to_string(L));
        FrequencyResponse fr{Tensor3(M, K, N)};
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
                dft_zero_padded(taps.fiber(m, k), L, fr.values.fiber(m, k), N);
        return fr;
    }

    namespace
    {
        template <typename T>
        T to_little(T v)
        {
            if constexpr (std::endian::native == std::endian::big)
            {
                unsigned char b[sizeof(T)];
                std::memcpy(b, &v, sizeof(T));
                for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
                    std::swap(b[i], b[sizeof(T) - 1 - i]);
                std::memcpy(&v, b, sizeof(T));
            }
            return v;
        }

        template <typename T>
        void put(std::ostream &out, T v)
        {
            v = to_little(v);
            out.write(reinterpret_cast<const char *>(&v), sizeof(T));
        }

        template <typename T>
        T get(std::istream &in)
        {
            T v;
            if (!in.read(reinterpret_cast<char *>(&v), sizeof(T)))
                throw Error(ErrorCode::Io, "truncated channel dump");
            return to_little(v);
        }
    }

    void write_channel_dump(std::ostream &out, const ChannelRealization &ch)
    {
        out.write("QMCH", 4);
        put<std::uint32_t>(out, 1);
        put<std::uint32_t>(out, std::uint32_t(ch.M()));
        put<std::uint32_t>(out, std::uint32_t(ch.K()));
        put<std::uint32_t>(out, std::uint32_t(ch.L()));
        for (const cplx &v : ch.taps.raw())
        {
            put<double>(out, v.real());
            put<double>(out, v.imag());
        }
        if (!out)
            throw Error(ErrorCode::Io, "failed writing channel dump");
    }

    ChannelRealization read_channel_dump(std::istream &in)
    {
        char magic[4];
        if (!in.read(magic, 4) || std::memcmp(magic, "QMCH", 4) != 0)
            throw Error(ErrorCode::Io, "not a channel dump");
        if (get<std::uint32_t>(in) != 1)
            throw Error(ErrorCode::Io, "unsupported channel dump version");
        const auto M = get<std::uint32_t>(in), K = get<std::uint32_t>(in), L = get<std::uint32_t>(in);
        ChannelRealization ch{Tensor3(int(M), int(K), int(L))};
        for (cplx &v : ch.taps.raw())
        {
            double re = get<double>(in);
            double im = get<double>(in);
            v = {re, im};
        }
        return ch;
    }

    void save_channel(const std::string &path, const ChannelRealization &ch)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error(ErrorCode::Io, "cannot open " + path);
        write_channel_dump(out, ch);
    }

    ChannelRealization load_channel(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::Io, "cannot open " + path);
        return read_channel_dump(in);
    }
}
