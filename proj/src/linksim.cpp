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

#include "quantmimo/linksim.hpp"
#include "quantmimo/waveform.hpp"

#include <cmath>

namespace qm
{
    namespace
    {
        // Noise for a full prefixed block of length total, one substream per antenna.
        void draw_noise(SigMat &z, const SystemConfig &config, const StreamFactory &streams, Purpose purpose)
        {
            for (Eigen::Index m = 0; m < z.rows(); ++m)
            {
                Rng rng = streams.stream(purpose, std::uint64_t(m));
                for (Eigen::Index n = 0; n < z.cols(); ++n)
                    z(m, n) = config.noise_floor > 0.0 ? complex_normal(rng, config.noise_floor) : cplx(0.0);
            }
        }

        std::vector<double> amplitudes(const SystemConfig &config)
        {
            std::vector<double> a;
            for (const auto &u : config.users)
                a.push_back(std::sqrt(u.rx_power()));
            return a;
        }
    }

    ReceivedBlock propagate(const ChannelRealization &ch, const SigMat &tx, const SystemConfig &config,
                            const StreamFactory &streams, Purpose noise_purpose, ReceiveOptions opts)
    {
        const int M = ch.M(), K = ch.K(), L = ch.L(), N = int(tx.cols());
        if (tx.rows() != K || config.K() != K)
            throw Error(ErrorCode::DimensionMismatch, "transmit block has " + std::to_string(tx.rows()) + " users, channel has " + std::to_string(K));
        const auto amp = amplitudes(config);

        ReceivedBlock rx;
        SigMat clean = SigMat::Zero(M, N);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < L; ++l)
                {
                    const cplx g = amp[std::size_t(k)] * ch.taps(m, k, l);
                    for (int n = l; n < N; ++n)
                        clean(m, n) += g * tx(k, n - l);
                }

        SigMat z(M, N);
        draw_noise(z, config, streams, noise_purpose);
        rx.y = clean + z;
        if (opts.keep_noise_free)
            rx.ybar = std::move(clean);
        if (opts.keep_noise)
            rx.noise = std::move(z);
        return rx;
    }

    ReceivedBlock propagate_block(const FrequencyResponse &H, const SigMat &tx, const SystemConfig &config,
                                  const StreamFactory &streams, Purpose noise_purpose, ReceiveOptions opts)
    {
        const int M = H.M(), K = H.K(), N = H.N(), L = config.L();
        if (tx.rows() != K || tx.cols() != N || config.K() != K)
            throw Error(ErrorCode::DimensionMismatch, "transmit block does not match the frequency grid");
        const auto amp = amplitudes(config);

        const SigMat X = unitary_dft_rows(tx);
        SigMat Y = SigMat::Zero(M, N);
        for (int m = 0; m < M; ++m)
            for (int k = 0; k < K; ++k)
            {
                const cplx *h = H.values.fiber(m, k);
                const double a = amp[std::size_t(k)];
                for (int nu = 0; nu < N; ++nu)
                    Y(m, nu) += a * h[nu] * X(k, nu);
            }
        SigMat clean = unitary_idft_rows(Y);

        SigMat zfull(M, N + L - 1);
        draw_noise(zfull, config, streams, noise_purpose);
        SigMat z = zfull.rightCols(N);

        ReceivedBlock rx;
        rx.y = clean + z;
        if (opts.keep_noise_free)
            rx.ybar = std::move(clean);
        if (opts.keep_noise)
            rx.noise = std::move(z);
        return rx;
    }

    SigMat quantize_one_bit(const SigMat &y)
    {
        const double a = 1.0 / std::sqrt(2.0);
        SigMat q(y.rows(), y.cols());
        for (Eigen::Index i = 0; i < y.size(); ++i)
        {
            const cplx v = y.data()[i];
            q.data()[i] = {v.real() >= 0.0 ? a : -a, v.imag() >= 0.0 ? a : -a};
        }
        return q;
    }

    SigMat receiver_output(const SystemConfig &config, const SigMat &y, double rho)
    {
        return config.quantized ? quantize_one_bit(y) : SigMat(rho * y);
    }

    RVec inst_rx_power(const SigMat &x, const SystemConfig &config)
    {
        const int K = int(x.rows()), N = int(x.cols()), L = config.L();
        if (K != config.K())
            throw Error(ErrorCode::DimensionMismatch, "transmit block does not match the user count");
        RVec P = RVec::Constant(N, config.noise_floor);
        for (int k = 0; k < K; ++k)
        {
            const double g = config.users[std::size_t(k)].rx_power();
            for (int n = 0; n < N; ++n)
            {
                double s = 0.0;
                for (int l = 0; l < L; ++l)
                    s += config.pdp.taps[std::size_t(l)] * std::norm(x(k, ((n - l) % N + N) % N));
                P(n) += g * s;
            }
        }
        return P;
    }

    SqrtPowerMoment estimate_sqrt_prx_mean(const SystemConfig &config, BlockKind kind, long samples, std::uint64_t seed)
    {
        const int N = kind == BlockKind::Pilot ? config.pilot_len : config.data_len;
        if (N < 1 || samples < 1)
            throw Error(ErrorCode::EmptyInput, "no samples for the received-power moment");
        const long blocks = std::max<long>(2, (samples + N - 1) / N);

        double sum = 0.0, sum_sq = 0.0;
        for (long b = 0; b < blocks; ++b)
        {
            StreamFactory f(splitmix64(seed ^ 0x6d6f6d656e7473ULL), std::uint64_t(kind == BlockKind::Pilot), std::uint64_t(b));
            SigMat x = kind == BlockKind::Pilot ? make_pilots(config.K(), N, f, config.pilot_phases).time
                                                : draw_data_block(config, f).time;
            RVec P = inst_rx_power(x, config);
            double block_mean = P.array().sqrt().mean();
            sum += block_mean;
            sum_sq += block_mean * block_mean;
        }
        SqrtPowerMoment m;
        m.samples = blocks * N;
        m.mean = sum / double(blocks);
        double var = std::max(0.0, (sum_sq - double(blocks) * m.mean * m.mean) / double(blocks - 1));
        m.std_error = std::sqrt(var / double(blocks));
        return m;
    }

    double rho_empirical(const SigMat &y, const SigMat &q)
    {
        if (y.size() == 0 || y.rows() != q.rows() || y.cols() != q.cols())
            throw Error(ErrorCode::EmptyInput, "rho estimate needs matched, nonempty samples");
        const cplx num = (y.conjugate().array() * q.array()).sum();
        const double den = y.squaredNorm();
        if (!(den > 0.0))
            throw Error(ErrorCode::EmptyInput, "rho estimate on an all-zero input");
        return num.real() / den;
    }

    double rho_closed_form(const SystemConfig &config, const SqrtPowerMoment &moment)
    {
        return std::sqrt(2.0 / pi) * moment.mean / mean_rx_power(config);
    }

    double rho_limit(const SystemConfig &config)
    {
        return std::sqrt(2.0 / (pi * mean_rx_power(config)));
    }

    double q_limit(const SystemConfig &config)
    {
        return config.quantized ? mean_rx_power(config) * (pi / 2.0 - 1.0) : 0.0;
    }

    RVec tau(const RVec &P, double sqrt_power_mean, double mean_power)
    {
        return (P.array().rsqrt() - sqrt_power_mean / mean_power).matrix();
    }

    QuantizerStats quantizer_stats(const SystemConfig &config, const SqrtPowerMoment &moment, const SigMat *x_time)
    {
        QuantizerStats s;
        s.mean_power = mean_rx_power(config);
        s.rho = rho_closed_form(config, moment);
        if (config.quantized)
        {
            s.err_var = 1.0 - s.rho * s.rho * s.mean_power;
            s.rel_distortion = s.err_var / (s.rho * s.rho);
            s.rel_distortion_limit = q_limit(config);
        }
        if (x_time)
        {
            s.inst_power = inst_rx_power(*x_time, config);
            s.tau = tau(s.inst_power, moment.mean, s.mean_power);
        }
        return s;
    }

    ErrorSample quantization_error(const SigMat &y, const SigMat &q, double rho)
    {
        if (y.rows() != q.rows() || y.cols() != q.cols())
            throw Error(ErrorCode::DimensionMismatch, "y and q differ in shape");
        ErrorSample s;
        s.e = q - rho * y;
        const double n = double(s.e.size());
        if (n > 0)
        {
            const cplx mean = s.e.sum() / n;
            s.mean_square = s.e.squaredNorm() / n;
            s.variance = s.mean_square - std::norm(mean);
        }
        return s;
    }

    AmplitudeDecomposition amplitude_decomposition(const SigMat &e, const SigMat &ybar, const RVec &tau)
    {
        if (e.rows() != ybar.rows() || e.cols() != ybar.cols() || e.cols() != tau.size())
            throw Error(ErrorCode::DimensionMismatch, "decomposition inputs differ in shape");
        AmplitudeDecomposition d;
        d.coherent = ybar * (std::sqrt(2.0 / pi) * tau).cast<cplx>().asDiagonal();
        d.residual = e - d.coherent;
        return d;
    }
}
