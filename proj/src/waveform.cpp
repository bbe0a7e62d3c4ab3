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

#include "quantmimo/waveform.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <vector>

namespace qm
{
    namespace
    {
        // Eigen's FFT object caches plans per size and is not safe to share between threads.
        Eigen::FFT<double> &fft_engine()
        {
            thread_local Eigen::FFT<double> fft = []
            {
                Eigen::FFT<double> f;
                f.SetFlag(Eigen::FFT<double>::Unscaled);
                return f;
            }();
            return fft;
        }

        thread_local std::vector<cplx> scratch;
    }

    void unitary_dft(const cplx *in, cplx *out, int n)
    {
        if (n < 1)
            throw Error(ErrorCode::EmptyInput, "DFT of an empty vector");
        if (n == 1) // kissfft does not handle a single point
        {
            out[0] = in[0];
            return;
        }
        scratch.assign(in, in + n);
        fft_engine().fwd(out, scratch.data(), n);
        const double s = 1.0 / std::sqrt(double(n));
        for (int i = 0; i < n; ++i)
            out[i] *= s;
    }

    void unitary_idft(const cplx *in, cplx *out, int n)
    {
        if (n < 1)
            throw Error(ErrorCode::EmptyInput, "DFT of an empty vector");
        if (n == 1) // kissfft does not handle a single point
        {
            out[0] = in[0];
            return;
        }
        scratch.assign(in, in + n);
        fft_engine().inv(out, scratch.data(), n);
        const double s = 1.0 / std::sqrt(double(n));
        for (int i = 0; i < n; ++i)
            out[i] *= s;
    }

    CVec unitary_dft(const CVec &v)
    {
        CVec out(v.size());
        unitary_dft(v.data(), out.data(), int(v.size()));
        return out;
    }

    CVec unitary_idft(const CVec &v)
    {
        CVec out(v.size());
        unitary_idft(v.data(), out.data(), int(v.size()));
        return out;
    }

    SigMat unitary_dft_rows(const SigMat &x)
    {
        SigMat out(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            unitary_dft(x.row(r).data(), out.row(r).data(), int(x.cols()));
        return out;
    }

    SigMat unitary_idft_rows(const SigMat &x)
    {
        SigMat out(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            unitary_idft(x.row(r).data(), out.row(r).data(), int(x.cols()));
        return out;
    }

    void dft_zero_padded(const cplx *h, int L, cplx *out, int N)
    {
        if (N < L)
            throw Error(ErrorCode::InvalidArgument, "DFT length shorter than the sequence");
        if (L > 8)
        {
            scratch.assign(std::size_t(N), cplx(0.0));
            std::copy(h, h + L, scratch.begin());
            fft_engine().fwd(out, scratch.data(), N);
            return;
        }
        // Short sequences: direct sum with a cached table of e^{-j 2 pi i / N}.
        thread_local std::vector<cplx> twiddle;
        if (int(twiddle.size()) != N)
        {
            twiddle.resize(std::size_t(N));
            for (int i = 0; i < N; ++i)
                twiddle[std::size_t(i)] = std::polar(1.0, -2.0 * pi * double(i) / double(N));
        }
        for (int nu = 0; nu < N; ++nu)
        {
            cplx acc = h[0];
            long idx = 0;
            for (int l = 1; l < L; ++l)
            {
                idx += nu;
                if (idx >= N)
                    idx -= N;
                acc += h[l] * twiddle[std::size_t(idx)];
            }
            out[nu] = acc;
        }
    }

    PilotBook make_pilots(int K, int N_p, const StreamFactory &streams, PhaseMode mode)
    {
        if (K < 1 || N_p < 1)
            throw Error(ErrorCode::InvalidArgument, "pilot dimensions must be positive");
        if (N_p % K != 0)
            throw Error(ErrorCode::PilotNotCombAligned, "N_p = " + std::to_string(N_p) + " is not a multiple of K = " + std::to_string(K));

        PilotBook book;
        book.mode = mode;
        book.phases = RMat::Zero(K, N_p);
        book.freq = SigMat::Zero(K, N_p);
        const double amp = std::sqrt(double(K) / double(N_p));
        for (int k = 0; k < K; ++k)
        {
            Rng rng = streams.stream(Purpose::PilotPhases, std::uint64_t(k));
            for (int nu = k; nu < N_p; nu += K)
            {
                double theta = mode == PhaseMode::Random ? 2.0 * pi * uniform01(rng) : 0.0;
                book.phases(k, nu) = theta;
                book.freq(k, nu) = std::polar(amp, theta);
            }
        }
        book.time = unitary_idft_rows(book.freq * std::sqrt(double(N_p)));
        return book;
    }

    TransmitBlock make_transmit_block(SigMat symbols, Waveform mode)
    {
        TransmitBlock b;
        b.mode = mode;
        b.time = mode == Waveform::OFDM ? unitary_idft_rows(symbols) : symbols;
        b.symbols = std::move(symbols);
        return b;
    }

    TransmitBlock draw_data_block(const SystemConfig &config, const StreamFactory &streams)
    {
        const int K = config.K(), N = config.data_len;
        SigMat s(K, N);
        const double a = 1.0 / std::sqrt(2.0);
        for (int k = 0; k < K; ++k)
        {
            Rng rng = streams.stream(Purpose::DataSymbols, std::uint64_t(k));
            if (config.alphabet == Alphabet::Gaussian)
            {
                for (int n = 0; n < N; ++n)
                    s(k, n) = complex_normal(rng);
            }
            else if (config.alphabet == Alphabet::QPSK)
            {
                std::uniform_int_distribution<int> bit(0, 1);
                for (int n = 0; n < N; ++n)
                {
                    double re = bit(rng) ? a : -a;
                    double im = bit(rng) ? a : -a;
                    s(k, n) = {re, im};
                }
            }
            else
            {
                // Levels {-3, -1, 1, 3} / sqrt(10) per component.
                std::uniform_int_distribution<int> level(0, 3);
                const double u = 1.0 / std::sqrt(10.0);
                for (int n = 0; n < N; ++n)
                {
                    double re = (2 * level(rng) - 3) * u;
                    double im = (2 * level(rng) - 3) * u;
                    s(k, n) = {re, im};
                }
            }
        }
        return make_transmit_block(std::move(s), config.waveform);
    }

    SigMat add_cyclic_prefix(const SigMat &x, int L)
    {
        const int N = int(x.cols()), P = L - 1;
        if (L < 1 || N < L)
            throw Error(ErrorCode::InvalidArgument, "cyclic prefix needs 1 <= L <= block length");
        SigMat out(x.rows(), N + P);
        out.rightCols(N) = x;
        if (P > 0)
            out.leftCols(P) = x.rightCols(P);
        return out;
    }

    SigMat strip_cyclic_prefix(const SigMat &y, int L)
    {
        const int P = L - 1;
        if (L < 1 || y.cols() < P + 1)
            throw Error(ErrorCode::InvalidArgument, "block shorter than the cyclic prefix");
        return y.rightCols(y.cols() - P);
    }
}
