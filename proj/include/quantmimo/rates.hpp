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

#ifndef QUANTMIMO_RATES_HPP
#define QUANTMIMO_RATES_HPP

#include "quantmimo/common.hpp"
#include "quantmimo/sysconfig.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace qm
{
    // Second-order statistics of (x, x^) for one user. The residual about the block's own
    // least-squares gain is carried explicitly so that pooling never subtracts large numbers.
    struct UserMoments
    {
        double sxx = 0.0;  // sum |x|^2
        cplx sxy = 0.0;    // sum x* x^
        double syy = 0.0;  // sum |x^|^2
        double resid = 0.0; // sum |x^ - g x|^2 with g = sxy / sxx
        double n = 0.0;

        static UserMoments from_samples(const cplx *x, const cplx *xhat, long count, long stride_x = 1, long stride_xhat = 1);

        cplx gain() const { return sxy / sxx; }

        // Exact pooling (associative and commutative up to rounding).
        UserMoments &merge(const UserMoments &o);
    };

    UserMoments merged(UserMoments a, const UserMoments &b);

    // R = log2(1 + |g|^2 p / (s2 - |g|^2 p)), g = sxy/sxx, p = sxx/n, s2 = syy/n.
    // Throws DegenerateMoments when the residual is not positive.
    double rate_from_moments(const UserMoments &m);
    double sinr_from_moments(const UserMoments &m);

    // Per-trial moments keyed by trial index. Reduction always walks trials in index order, so
    // the result does not depend on how trials were distributed over workers.
    class MomentAccumulator
    {
    public:
        void add_trial(std::uint64_t trial, std::vector<UserMoments> users);
        void merge(const MomentAccumulator &other);
        void count_aborted(long n = 1) { aborted_ += n; }

        int trials() const { return int(trials_.size()); }
        int users() const;
        long aborted() const { return aborted_; }

        UserMoments total(int user) const;
        std::vector<UserMoments> per_trial(int user) const;
        std::vector<std::uint64_t> trial_ids() const;

    private:
        std::map<std::uint64_t, std::vector<UserMoments>> trials_;
        long aborted_ = 0;
    };

    struct RateEstimate
    {
        double rate = 0.0;
        double std_error = 0.0; // jackknife over trials
        double sinr = 0.0;
        int trials = 0;
    };

    // Leave-one-out moments for each trial.
    std::vector<UserMoments> leave_one_out(const std::vector<UserMoments> &per_trial);

    // sqrt((T-1)/T sum (theta_i - mean theta)^2)
    double jackknife_std_error(const std::vector<double> &loo);

    RateEstimate empirical_rate(const MomentAccumulator &acc, int user);

    struct PairedDifference
    {
        double difference = 0.0; // rate(a) - rate(b)
        double std_error = 0.0;  // jackknife of the paired difference
        double independent_std_error = 0.0;
    };

    // Both accumulators must hold the same trial indices (same channels and noise replayed).
    PairedDifference paired_rate_difference(const MomentAccumulator &a, const MomentAccumulator &b, int user);

    // max_k |mean x* x^ over the time block - mean x~* x^~ over the tones|
    double sc_ofdm_equivalence(const SigMat &x_time, const SigMat &xhat_time, const SigMat &x_freq, const SigMat &xhat_freq);

    // ---------------------------------------------------------------------------------------------
    // Closed forms

    struct CharParams
    {
        RVec G; // array gain per user
        RMat I; // K x K interference factors
    };

    // MRC: G = M, I = 1. ZFC: G = M - K, I = 0.
    CharParams char_params(CombinerKind kind, int M, int K);

    // Monte Carlo over Gaussian channels with CN(0, c_k) columns; the combiner is normalised with
    // the ensemble alpha. Works for every combiner kind.
    CharParams characteristic_params_empirical(CombinerKind kind, int M, const RVec &c, double lambda = 0.0,
                                               int samples = 2000, std::uint64_t seed = 0xc4a2);

    struct SinrBreakdown
    {
        double signal = 0.0;           // c_k beta_k P_k G_k
        double interference = 0.0;     // sum_k' c_k' beta_k' P_k' I_kk'
        double estimation_error = 0.0; // sum_k' beta_k' P_k' (1 - c_k')
        double noise = 0.0;            // N0
        double quantization = 0.0;     // Q'
        double denominator = 0.0;
        double sinr = 0.0;
        double rate = 0.0;
    };

    SinrBreakdown closed_form_breakdown(const SystemConfig &config, const RVec &c, const CharParams &params, int user);

    // Limit rate per user. c defaults to the estimation quality of the configuration (c = 1 for
    // perfect CSI). RZFC parameters are estimated by Monte Carlo.
    RVec closed_form_rate(const SystemConfig &config, const RVec &c, CombinerKind kind);
    RVec closed_form_rate(const SystemConfig &config, CombinerKind kind);

    // Quality vector the closed forms use for this configuration.
    RVec config_quality(const SystemConfig &config);

    double loss_factor(double delta); // 2 / (pi delta)

    // High-SNR limit of the quantized ZFC rate: the closed form with every power scaled to
    // infinity, which is the closed form evaluated with N0 = 0.
    double rate_ceiling(const SystemConfig &config, int user = 0);

    struct Baselines
    {
        RVec mrc, zfc;   // quantized
        RVec mrc0, zfc0; // unquantized
        double ceiling = 0.0;
        double loss_factor = 0.0;
    };

    Baselines rate_baselines(const SystemConfig &config);

    // Smallest M in [lo, hi] with rate(M) >= target, for nondecreasing rate(M). Returns -1 if none.
    int smallest_antennas(const std::function<double(int)> &rate, double target, int lo, int hi);

    struct AntennaCost
    {
        int unquantized_antennas = 0;
        int quantized_antennas = 0;
        double target_rate = 0.0;
        double ratio = 0.0;
    };

    // Antennas a quantized system needs to match the unquantized rate of `user` at config.antennas.
    AntennaCost antenna_cost(const SystemConfig &config, CombinerKind kind, int user, int max_antennas = 1 << 20);

    // ---------------------------------------------------------------------------------------------
    // Decomposition audit: components of the combined estimate, per user.

    enum AuditComponent : int
    {
        AuditSymbol = 0, // x~_k (reference)
        AuditGain,       // rho sqrt(c_k beta_k P_k) x^'_kk
        AuditCross,      // sum_{k' != k} rho sqrt(c_k' beta_k' P_k') x^'_kk'
        AuditEstimation, // u'_k (unscaled)
        AuditNoise,      // z'_k (unscaled)
        AuditQuantization, // e'_k
        AuditCount
    };

    class AuditAccumulator
    {
    public:
        explicit AuditAccumulator(int users = 0);

        // comps[i] points at `count` samples of component i.
        void add(int user, const cplx *const comps[AuditCount], long count);
        void merge(const AuditAccumulator &other);

        int users() const { return int(cov_.size()); }
        const CMat &second_moments(int user) const { return cov_[std::size_t(user)]; }
        double samples(int user) const { return n_[std::size_t(user)]; }

    private:
        std::vector<CMat> cov_;
        std::vector<double> n_;
    };

    struct AuditReport
    {
        CMat second_moments; // E[a_i a_j^*], AuditCount x AuditCount
        RMat correlation;    // |E a_i a_j^*| / sqrt(E|a_i|^2 E|a_j|^2)
        double samples = 0.0;
        double max_offdiag = 0.0; // over the five estimate components
        double threshold = 0.0;   // 4 / sqrt(samples)
    };

    AuditReport decomposition_audit(const AuditAccumulator &acc, int user);
}

#endif
