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

#include "quantmimo/combine.hpp"
#include "quantmimo/linksim.hpp"
#include "quantmimo/rng.hpp"
#include "quantmimo/waveform.hpp"

#include <cmath>
#include <sstream>

namespace qm
{
    namespace
    {
        // Unnormalised K x M combiner for one tone.
        CMat tone_combiner(const CMat &H, CombinerKind kind, double lambda, int tone)
        {
            if (kind == CombinerKind::MRC)
                return H.adjoint();
            const int K = int(H.cols());
            CMat G = H.adjoint() * H;
            if (kind == CombinerKind::RZFC)
                G.diagonal().array() += lambda;
            Eigen::LLT<CMat> llt(G);
            const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
            if (!(rcond * max_gram_condition >= 1.0))
            {
                std::ostringstream os;
                os << "Gram matrix at tone " << tone << " (K = " << K << ") has condition estimate "
                   << (rcond > 0.0 ? 1.0 / rcond : INFINITY) << " > " << max_gram_condition;
                throw Error(ErrorCode::SingularGram, os.str());
            }
            return llt.solve(H.adjoint());
        }

        CMat tone_matrix(const FrequencyResponse &H, int nu)
        {
            CMat h(H.M(), H.K());
            for (int m = 0; m < H.M(); ++m)
                for (int k = 0; k < H.K(); ++k)
                    h(m, k) = H.values(m, k, nu);
            return h;
        }
    }

    CombinerWeights build_combiner(const FrequencyResponse &H, CombinerKind kind, double lambda, Normalization norm, const RVec *alpha)
    {
        const int M = H.M(), K = H.K(), N = H.N();
        if (kind != CombinerKind::MRC && M < K)
            throw Error(ErrorCode::TooFewAntennas, "M = " + std::to_string(M) + " < K = " + std::to_string(K));
        if (kind == CombinerKind::RZFC && !(lambda >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "regularisation must be nonnegative");

        CombinerWeights w;
        w.kind = kind;
        w.lambda = kind == CombinerKind::RZFC ? lambda : 0.0;
        w.W = Tensor3(N, K, M);
        RVec energy = RVec::Zero(K);
        for (int nu = 0; nu < N; ++nu)
        {
            const CMat Wn = tone_combiner(tone_matrix(H, nu), kind, lambda, nu);
            for (int k = 0; k < K; ++k)
            {
                cplx *row = w.W.fiber(nu, k);
                for (int m = 0; m < M; ++m)
                    row[m] = Wn(k, m);
                energy(k) += Wn.row(k).squaredNorm();
            }
        }

        switch (norm)
        {
        case Normalization::PerRealization:
            w.alpha = energy / double(N);
            break;
        case Normalization::Ensemble:
            if (!alpha || alpha->size() != K)
                throw Error(ErrorCode::InvalidArgument, "ensemble normalisation needs one alpha per user");
            w.alpha = *alpha;
            break;
        case Normalization::None:
            w.alpha = RVec::Ones(K);
            break;
        }

        for (int k = 0; k < K; ++k)
        {
            if (!(w.alpha(k) > 0.0))
                throw Error(ErrorCode::SingularGram, "combiner row " + std::to_string(k) + " has zero energy");
            const double s = 1.0 / std::sqrt(w.alpha(k));
            for (int nu = 0; nu < N; ++nu)
            {
                cplx *row = w.W.fiber(nu, k);
                for (int m = 0; m < M; ++m)
                    row[m] *= s;
            }
        }
        return w;
    }

    RVec ensemble_alpha(CombinerKind kind, int M, const RVec &c, double lambda, int samples, std::uint64_t seed)
    {
        const int K = int(c.size());
        switch (kind)
        {
        case CombinerKind::MRC:
            return double(M) * c;
        case CombinerKind::ZFC:
            if (M <= K)
                throw Error(ErrorCode::TooFewAntennas, "zero-forcing normalisation needs M > K");
            return (c.array() * double(M - K)).inverse().matrix();
        case CombinerKind::RZFC:
            break;
        }

        RVec acc = RVec::Zero(K);
        const StreamFactory f(seed);
        for (int s = 0; s < samples; ++s)
        {
            Rng rng = f.stream(Purpose::Ensemble, std::uint64_t(s));
            CMat H(M, K);
            for (int k = 0; k < K; ++k)
                for (int m = 0; m < M; ++m)
                    H(m, k) = complex_normal(rng, c(k));
            const CMat W = tone_combiner(H, CombinerKind::RZFC, lambda, 0);
            acc += W.rowwise().squaredNorm();
        }
        return acc / double(samples);
    }

    double default_rzfc_lambda(const SystemConfig &config)
    {
        return double(config.K()) * (config.noise_floor + q_limit(config)) / total_user_power(config);
    }

    double resolve_lambda(const SystemConfig &config)
    {
        if (config.combiner.kind != CombinerKind::RZFC)
            return 0.0;
        return config.combiner.lambda ? *config.combiner.lambda : default_rzfc_lambda(config);
    }

    SigMat apply_freq(const CombinerWeights &w, const SigMat &q)
    {
        const int N = w.N(), K = w.K(), M = w.M();
        if (q.rows() != M || q.cols() != N)
            throw Error(ErrorCode::DimensionMismatch, "receiver block does not match the combiner");
        SigMat x = SigMat::Zero(K, N);
        for (int nu = 0; nu < N; ++nu)
            for (int k = 0; k < K; ++k)
            {
                const cplx *row = w.W.fiber(nu, k);
                cplx s = 0.0;
                for (int m = 0; m < M; ++m)
                    s += row[m] * q(m, nu);
                x(k, nu) = s;
            }
        return x;
    }

    SigMat combine_freq(const FrequencyResponse &H, CombinerKind kind, double lambda, const RVec &alpha, const SigMat &q)
    {
        const int M = H.M(), K = H.K(), N = H.N();
        if (q.rows() != M || q.cols() != N)
            throw Error(ErrorCode::DimensionMismatch, "receiver block does not match the channel");
        if (alpha.size() != K || !(alpha.array() > 0.0).all())
            throw Error(ErrorCode::InvalidArgument, "one positive alpha per user is required");
        if (kind != CombinerKind::MRC && M < K)
            throw Error(ErrorCode::TooFewAntennas, "M = " + std::to_string(M) + " < K = " + std::to_string(K));

        // Tone-contiguous copies: column nu*K + k of Ht is h~_k[nu].
        CMat Ht(M, K * N), Qt(M, N);
        for (int m = 0; m < M; ++m)
        {
            for (int k = 0; k < K; ++k)
                for (int nu = 0; nu < N; ++nu)
                    Ht(m, nu * K + k) = H.values(m, k, nu);
            for (int nu = 0; nu < N; ++nu)
                Qt(m, nu) = q(m, nu);
        }
        const RVec scale = alpha.array().rsqrt().matrix();

        SigMat x(K, N);
        CMat G(K, K);
        CVec z(K);
        Eigen::LLT<CMat, Eigen::Lower> llt(K);
        for (int nu = 0; nu < N; ++nu)
        {
            const auto Hn = Ht.middleCols(nu * K, K);
            z.noalias() = Hn.adjoint() * Qt.col(nu);
            if (kind != CombinerKind::MRC)
            {
                G.setZero();
                G.selfadjointView<Eigen::Lower>().rankUpdate(Hn.adjoint());
                if (kind == CombinerKind::RZFC)
                    G.diagonal().array() += lambda;
                llt.compute(G);
                const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
                if (!(rcond * max_gram_condition >= 1.0))
                {
                    std::ostringstream os;
                    os << "Gram matrix at tone " << nu << " (K = " << K << ") has condition estimate "
                       << (rcond > 0.0 ? 1.0 / rcond : INFINITY) << " > " << max_gram_condition;
                    throw Error(ErrorCode::SingularGram, os.str());
                }
                llt.solveInPlace(z);
            }
            for (int k = 0; k < K; ++k)
                x(k, nu) = z(k) * scale(k);
        }
        return x;
    }

    SigMat apply_time(const CombinerWeights &w, const SigMat &q)
    {
        const int N = w.N(), K = w.K(), M = w.M();
        if (q.rows() != M || q.cols() != N)
            throw Error(ErrorCode::DimensionMismatch, "receiver block does not match the combiner");
        const Tensor3 h = impulse_response(w);
        SigMat x = SigMat::Zero(K, N);
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
            {
                const cplx *taps = h.fiber(k, m);
                for (int n = 0; n < N; ++n)
                {
                    cplx s = 0.0;
                    for (int l = 0; l < N; ++l)
                        s += taps[l] * q(m, (n - l + N) % N);
                    x(k, n) += s;
                }
            }
        return x;
    }

    SigMat symbol_estimates(Waveform mode, const CombinerWeights &w, const SigMat &q_time)
    {
        SigMat x = apply_freq(w, unitary_dft_rows(q_time));
        return mode == Waveform::OFDM ? x : unitary_idft_rows(x);
    }

    Tensor3 impulse_response(const CombinerWeights &w)
    {
        const int N = w.N(), K = w.K(), M = w.M();
        Tensor3 h(K, M, N);
        std::vector<cplx> v(static_cast<std::size_t>(N));
        const double s = 1.0 / std::sqrt(double(N));
        for (int k = 0; k < K; ++k)
            for (int m = 0; m < M; ++m)
            {
                for (int nu = 0; nu < N; ++nu)
                    v[std::size_t(nu)] = w.W(nu, k, m);
                cplx *out = h.fiber(k, m);
                unitary_idft(v.data(), out, N);
                for (int l = 0; l < N; ++l)
                    out[l] *= s;
            }
        return h;
    }

    EnergyProfile energy_profile(const Tensor3 &h, int window)
    {
        const int N = h.dim2();
        if (window < 1 || window > N)
            throw Error(ErrorCode::InvalidArgument, "window must lie in [1, N]");
        EnergyProfile p;
        p.tap_energy = RVec::Zero(N);
        for (int k = 0; k < h.dim0(); ++k)
            for (int m = 0; m < h.dim1(); ++m)
                for (int l = 0; l < N; ++l)
                    p.tap_energy(l) += std::norm(h(k, m, l));
        const double total = p.tap_energy.sum();
        double best = -1.0;
        for (int start = 0; start < N; ++start)
        {
            double e = 0.0;
            for (int i = 0; i < window; ++i)
                e += p.tap_energy((start + i) % N);
            if (e > best)
            {
                best = e;
                p.window_start = start;
            }
        }
        p.window_fraction = total > 0.0 ? best / total : 0.0;
        return p;
    }
}
