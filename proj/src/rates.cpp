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

#include "quantmimo/rates.hpp"
#include "quantmimo/channel.hpp"
#include "quantmimo/chest.hpp"
#include "quantmimo/combine.hpp"
#include "quantmimo/linksim.hpp"

#include <cmath>

namespace qm
{
    UserMoments UserMoments::from_samples(const cplx *x, const cplx *xhat, long count, long sx, long sy)
    {
        UserMoments m;
        m.n = double(count);
        for (long i = 0; i < count; ++i)
        {
            const cplx a = x[i * sx], b = xhat[i * sy];
            m.sxx += std::norm(a);
            m.sxy += std::conj(a) * b;
            m.syy += std::norm(b);
        }
        if (m.sxx > 0.0)
        {
            const cplx g = m.gain();
            for (long i = 0; i < count; ++i)
                m.resid += std::norm(xhat[i * sy] - g * x[i * sx]);
        }
        else
            m.resid = m.syy;
        return m;
    }

    UserMoments &UserMoments::merge(const UserMoments &o)
    {
        if (o.n == 0.0)
            return *this;
        if (n == 0.0)
            return *this = o;
        const double s = sxx + o.sxx;
        const cplx g = (sxy + o.sxy) / s;
        const double r = resid + o.resid + std::norm(gain() - g) * sxx + std::norm(o.gain() - g) * o.sxx;
        sxx = s;
        sxy += o.sxy;
        syy += o.syy;
        resid = r;
        n += o.n;
        return *this;
    }

    UserMoments merged(UserMoments a, const UserMoments &b)
    {
        return a.merge(b);
    }

    double sinr_from_moments(const UserMoments &m)
    {
        if (!(m.sxx > 0.0) || !(m.resid > 0.0) || !std::isfinite(m.resid))
            throw Error(ErrorCode::DegenerateMoments, "residual power " + std::to_string(m.resid) + " over " + std::to_string(m.n) + " samples");
        return std::norm(m.gain()) * m.sxx / m.resid;
    }

    double rate_from_moments(const UserMoments &m)
    {
        return std::log2(1.0 + sinr_from_moments(m));
    }

    void MomentAccumulator::add_trial(std::uint64_t trial, std::vector<UserMoments> users)
    {
        if (!trials_.empty() && trials_.begin()->second.size() != users.size())
            throw Error(ErrorCode::DimensionMismatch, "trial has a different user count");
        if (!trials_.emplace(trial, std::move(users)).second)
            throw Error(ErrorCode::InvalidArgument, "trial " + std::to_string(trial) + " added twice");
    }

    void MomentAccumulator::merge(const MomentAccumulator &other)
    {
        for (const auto &[t, u] : other.trials_)
            add_trial(t, u);
        aborted_ += other.aborted_;
    }

    int MomentAccumulator::users() const
    {
        return trials_.empty() ? 0 : int(trials_.begin()->second.size());
    }

    UserMoments MomentAccumulator::total(int user) const
    {
        UserMoments m;
        for (const auto &[t, u] : trials_)
            m.merge(u[std::size_t(user)]);
        return m;
    }

    std::vector<UserMoments> MomentAccumulator::per_trial(int user) const
    {
        std::vector<UserMoments> v;
        v.reserve(trials_.size());
        for (const auto &[t, u] : trials_)
            v.push_back(u[std::size_t(user)]);
        return v;
    }

    std::vector<std::uint64_t> MomentAccumulator::trial_ids() const
    {
        std::vector<std::uint64_t> v;
        for (const auto &[t, u] : trials_)
            v.push_back(t);
        return v;
    }

    std::vector<UserMoments> leave_one_out(const std::vector<UserMoments> &v)
    {
        const std::size_t T = v.size();
        std::vector<UserMoments> prefix(T + 1), suffix(T + 1), out(T);
        for (std::size_t i = 0; i < T; ++i)
            prefix[i + 1] = merged(prefix[i], v[i]);
        for (std::size_t i = T; i-- > 0;)
            suffix[i] = merged(v[i], suffix[i + 1]);
        for (std::size_t i = 0; i < T; ++i)
            out[i] = merged(prefix[i], suffix[i + 1]);
        return out;
    }

    double jackknife_std_error(const std::vector<double> &loo)
    {
        const double T = double(loo.size());
        if (T < 2)
            return 0.0;
        double mean = 0.0;
        for (double v : loo)
            mean += v;
        mean /= T;
        double ss = 0.0;
        for (double v : loo)
            ss += (v - mean) * (v - mean);
        return std::sqrt((T - 1.0) / T * ss);
    }

    RateEstimate empirical_rate(const MomentAccumulator &acc, int user)
    {
        if (acc.trials() < 2)
            throw Error(ErrorCode::DegenerateMoments, "at least two trials are needed for a rate estimate");
        RateEstimate r;
        const auto per = acc.per_trial(user);
        const UserMoments tot = acc.total(user);
        r.sinr = sinr_from_moments(tot);
        r.rate = std::log2(1.0 + r.sinr);
        r.trials = acc.trials();
        std::vector<double> loo;
        for (const auto &m : leave_one_out(per))
            loo.push_back(rate_from_moments(m));
        r.std_error = jackknife_std_error(loo);
        return r;
    }

    PairedDifference paired_rate_difference(const MomentAccumulator &a, const MomentAccumulator &b, int user)
    {
        if (a.trial_ids() != b.trial_ids())
            throw Error(ErrorCode::InvalidArgument, "paired comparison needs identical trial sets");
        PairedDifference d;
        const RateEstimate ra = empirical_rate(a, user), rb = empirical_rate(b, user);
        d.difference = ra.rate - rb.rate;
        d.independent_std_error = std::hypot(ra.std_error, rb.std_error);
        const auto la = leave_one_out(a.per_trial(user)), lb = leave_one_out(b.per_trial(user));
        std::vector<double> diff;
        for (std::size_t i = 0; i < la.size(); ++i)
            diff.push_back(rate_from_moments(la[i]) - rate_from_moments(lb[i]));
        d.std_error = jackknife_std_error(diff);
        return d;
    }

    double sc_ofdm_equivalence(const SigMat &xt, const SigMat &yt, const SigMat &xf, const SigMat &yf)
    {
        if (xt.rows() != xf.rows() || xt.cols() != xf.cols() || yt.rows() != yf.rows() || yt.cols() != yf.cols() ||
            xt.rows() != yt.rows() || xt.cols() != yt.cols())
            throw Error(ErrorCode::DimensionMismatch, "time and frequency blocks differ in shape");
        const double n = double(xt.cols());
        double worst = 0.0;
        for (Eigen::Index k = 0; k < xt.rows(); ++k)
        {
            const cplx a = (xt.row(k).conjugate().array() * yt.row(k).array()).sum() / n;
            const cplx b = (xf.row(k).conjugate().array() * yf.row(k).array()).sum() / n;
            worst = std::max(worst, std::abs(a - b));
        }
        return worst;
    }

    // ---------------------------------------------------------------------------------------------

    CharParams char_params(CombinerKind kind, int M, int K)
    {
        CharParams p;
        switch (kind)
        {
        case CombinerKind::MRC:
            p.G = RVec::Constant(K, double(M));
            p.I = RMat::Ones(K, K);
            break;
        case CombinerKind::ZFC:
            p.G = RVec::Constant(K, double(M - K));
            p.I = RMat::Zero(K, K);
            break;
        case CombinerKind::RZFC:
            throw Error(ErrorCode::InvalidArgument, "RZFC parameters have no closed form");
        }
        return p;
    }

    CharParams characteristic_params_empirical(CombinerKind kind, int M, const RVec &c, double lambda, int samples, std::uint64_t seed)
    {
        const int K = int(c.size());
        const RVec alpha = ensemble_alpha(kind, M, c, lambda, samples, splitmix64(seed));
        const StreamFactory f(seed);
        CMat mean = CMat::Zero(K, K); // E[v_kk']
        RMat power = RMat::Zero(K, K); // E|v_kk'|^2
        for (int s = 0; s < samples; ++s)
        {
            Rng rng = f.stream(Purpose::Ensemble, std::uint64_t(s));
            FrequencyResponse H{Tensor3(M, K, 1)};
            for (int k = 0; k < K; ++k)
                for (int m = 0; m < M; ++m)
                    H.values(m, k, 0) = complex_normal(rng, c(k));
            const CombinerWeights w = build_combiner(H, kind, lambda, Normalization::Ensemble, &alpha);
            for (int k = 0; k < K; ++k)
                for (int j = 0; j < K; ++j)
                {
                    cplx v = 0.0;
                    for (int m = 0; m < M; ++m)
                        v += w.W(0, k, m) * H.values(m, j, 0);
                    v /= std::sqrt(c(j));
                    mean(k, j) += v;
                    power(k, j) += std::norm(v);
                }
        }
        mean /= double(samples);
        power /= double(samples);
        CharParams p;
        p.G = RVec(K);
        p.I = RMat(K, K);
        for (int k = 0; k < K; ++k)
        {
            p.G(k) = std::norm(mean(k, k));
            for (int j = 0; j < K; ++j)
                p.I(k, j) = j == k ? power(k, k) - std::norm(mean(k, k)) : power(k, j);
        }
        return p;
    }

    SinrBreakdown closed_form_breakdown(const SystemConfig &config, const RVec &c, const CharParams &params, int k)
    {
        const int K = config.K();
        if (c.size() != K)
            throw Error(ErrorCode::DimensionMismatch, "quality vector size differs from K");
        SinrBreakdown b;
        const auto &u = config.users;
        b.signal = c(k) * u[std::size_t(k)].rx_power() * params.G(k);
        for (int j = 0; j < K; ++j)
        {
            const double P = u[std::size_t(j)].rx_power();
            b.interference += c(j) * P * params.I(k, j);
            b.estimation_error += P * (1.0 - c(j));
        }
        b.noise = config.noise_floor;
        b.quantization = q_limit(config);
        b.denominator = b.interference + b.estimation_error + b.noise + b.quantization;
        b.sinr = b.signal / b.denominator;
        b.rate = std::log2(1.0 + b.sinr);
        return b;
    }

    RVec config_quality(const SystemConfig &config)
    {
        return config.csi == CsiMode::Perfect ? RVec::Ones(config.K()) : user_quality(config);
    }

    RVec closed_form_rate(const SystemConfig &config, const RVec &c, CombinerKind kind)
    {
        const int K = config.K();
        const CharParams p = kind == CombinerKind::RZFC
                                 ? characteristic_params_empirical(kind, config.M(), c, resolve_lambda(config))
                                 : char_params(kind, config.M(), K);
        RVec r(K);
        for (int k = 0; k < K; ++k)
            r(k) = closed_form_breakdown(config, c, p, k).rate;
        return r;
    }

    RVec closed_form_rate(const SystemConfig &config, CombinerKind kind)
    {
        return closed_form_rate(config, config_quality(config), kind);
    }

    double loss_factor(double delta)
    {
        return 2.0 / (pi * delta);
    }

    double rate_ceiling(const SystemConfig &config, int user)
    {
        SystemConfig c = config;
        c.quantized = true;
        c.noise_floor = 0.0;
        return closed_form_rate(c, CombinerKind::ZFC)(user);
    }

    Baselines rate_baselines(const SystemConfig &config)
    {
        SystemConfig q = config, u = config;
        q.quantized = true;
        u.quantized = false;
        Baselines b;
        b.mrc = closed_form_rate(q, CombinerKind::MRC);
        b.zfc = closed_form_rate(q, CombinerKind::ZFC);
        b.mrc0 = closed_form_rate(u, CombinerKind::MRC);
        b.zfc0 = closed_form_rate(u, CombinerKind::ZFC);
        b.ceiling = rate_ceiling(config);
        b.loss_factor = loss_factor(quality_ratio(config.mu(), config.mu(), config));
        return b;
    }

    int smallest_antennas(const std::function<double(int)> &rate, double target, int lo, int hi)
    {
        if (lo > hi || rate(hi) < target)
            return -1;
        if (rate(lo) >= target)
            return lo;
        // invariant: rate(lo) < target <= rate(hi)
        while (hi - lo > 1)
        {
            const int mid = lo + (hi - lo) / 2;
            if (rate(mid) >= target)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    AntennaCost antenna_cost(const SystemConfig &config, CombinerKind kind, int user, int max_antennas)
    {
        SystemConfig u = config, q = config;
        u.quantized = false;
        q.quantized = true;
        AntennaCost a;
        a.unquantized_antennas = config.antennas;
        a.target_rate = closed_form_rate(u, kind)(user);
        const RVec cq = config_quality(q);
        auto rate = [&](int M)
        {
            SystemConfig s = q;
            s.antennas = M;
            return closed_form_rate(s, cq, kind)(user);
        };
        const int lo = kind == CombinerKind::MRC ? 1 : config.K() + 1;
        a.quantized_antennas = smallest_antennas(rate, a.target_rate, lo, max_antennas);
        a.ratio = double(a.quantized_antennas) / double(a.unquantized_antennas);
        return a;
    }

    // ---------------------------------------------------------------------------------------------

    AuditAccumulator::AuditAccumulator(int users)
        : cov_(std::size_t(users), CMat::Zero(AuditCount, AuditCount)), n_(std::size_t(users), 0.0) {}

    void AuditAccumulator::add(int user, const cplx *const comps[AuditCount], long count)
    {
        CMat &c = cov_[std::size_t(user)];
        for (long s = 0; s < count; ++s)
            for (int i = 0; i < AuditCount; ++i)
                for (int j = 0; j < AuditCount; ++j)
                    c(i, j) += comps[i][s] * std::conj(comps[j][s]);
        n_[std::size_t(user)] += double(count);
    }

    void AuditAccumulator::merge(const AuditAccumulator &o)
    {
        if (cov_.empty())
        {
            *this = o;
            return;
        }
        if (o.cov_.size() != cov_.size())
            throw Error(ErrorCode::DimensionMismatch, "audit accumulators differ in user count");
        for (std::size_t k = 0; k < cov_.size(); ++k)
        {
            cov_[k] += o.cov_[k];
            n_[k] += o.n_[k];
        }
    }

    AuditReport decomposition_audit(const AuditAccumulator &acc, int user)
    {
        AuditReport r;
        r.samples = acc.samples(user);
        if (!(r.samples > 0.0))
            throw Error(ErrorCode::EmptyInput, "empty audit");
        r.second_moments = acc.second_moments(user) / r.samples;
        r.correlation = RMat(AuditCount, AuditCount);
        for (int i = 0; i < AuditCount; ++i)
            for (int j = 0; j < AuditCount; ++j)
            {
                const double d = std::sqrt(r.second_moments(i, i).real() * r.second_moments(j, j).real());
                r.correlation(i, j) = d > 0.0 ? std::abs(r.second_moments(i, j)) / d : 0.0;
            }
        for (int i = AuditGain; i < AuditCount; ++i)
            for (int j = i + 1; j < AuditCount; ++j)
                r.max_offdiag = std::max(r.max_offdiag, r.correlation(i, j));
        r.threshold = 4.0 / std::sqrt(r.samples);
        return r;
    }
}
