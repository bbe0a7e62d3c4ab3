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

#include <catch2/catch_amalgamated.hpp>
#include "quantmimo/chest.hpp"
#include "quantmimo/pipeline.hpp"
#include "quantmimo/rates.hpp"
#include "quantmimo/waveform.hpp"
#include "oracles.hpp"

#include <algorithm>

using namespace qm;
using Catch::Approx;

namespace
{
    struct Samples
    {
        std::vector<cplx> x, y;
    };

    Samples noisy_pair(std::size_t n, cplx gain, double noise, std::uint64_t seed)
    {
        std::mt19937_64 g(seed);
        Samples s;
        s.x = oracle::random_vector(g, n);
        auto z = oracle::random_vector(g, n);
        for (std::size_t i = 0; i < n; ++i)
            s.y.push_back(gain * s.x[i] + std::sqrt(noise) * z[i]);
        return s;
    }

    // R = log2(1 + |g|^2 p / (s2 - |g|^2 p)) written out over raw samples.
    double rate_oracle(const std::vector<cplx> &x, const std::vector<cplx> &y)
    {
        cplx sxy = 0.0;
        double sxx = 0.0, syy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            sxy += std::conj(x[i]) * y[i];
            sxx += std::norm(x[i]);
            syy += std::norm(y[i]);
        }
        const double n = double(x.size());
        const cplx g = sxy / sxx;
        const double p = sxx / n, s2 = syy / n;
        return std::log2(1.0 + std::norm(g) * p / (s2 - std::norm(g) * p));
    }

    UserMoments moments(const Samples &s, std::size_t from, std::size_t to)
    {
        return UserMoments::from_samples(s.x.data() + from, s.y.data() + from, long(to - from));
    }

    SystemConfig fig5_config(int K, int L)
    {
        SystemConfig c = make_equal_power_config(128, K, L, 10.0, 1, CombinerKind::MRC);
        c.csi = CsiMode::Perfect;
        return c;
    }
}

TEST_CASE("rates - Moment pooling")
{
    auto s = noisy_pair(3000, {0.8, -0.3}, 0.5, 1);
    const UserMoments all = moments(s, 0, 3000);
    CHECK(rate_from_moments(all) == Approx(rate_oracle(s.x, s.y)).epsilon(1e-12));

    UserMoments a = moments(s, 0, 1000), b = moments(s, 1000, 2200), c = moments(s, 2200, 3000);
    UserMoments ab_c = merged(merged(a, b), c), a_bc = merged(a, merged(b, c)), cba = merged(merged(c, b), a);
    for (const auto &m : {ab_c, a_bc, cba})
    {
        CHECK(m.n == 3000.0);
        CHECK(m.sxx == Approx(all.sxx).epsilon(1e-12));
        CHECK(std::abs(m.sxy - all.sxy) < 1e-12 * std::abs(all.sxy));
        CHECK(m.syy == Approx(all.syy).epsilon(1e-12));
        CHECK(m.resid == Approx(all.resid).epsilon(1e-11));
        CHECK(rate_from_moments(m) == Approx(rate_from_moments(all)).epsilon(1e-12));
    }
    CHECK(all.resid >= 0.0);
    CHECK(all.sxx >= 0.0);
    CHECK(all.syy >= 0.0);

    // Strided access.
    std::vector<cplx> inter(6000);
    for (std::size_t i = 0; i < 3000; ++i)
        inter[2 * i] = s.x[i];
    auto st = UserMoments::from_samples(inter.data(), s.y.data(), 3000, 2, 1);
    CHECK(st.sxx == Approx(all.sxx).epsilon(1e-14));

    // Residual is not obtained by cancellation: a nearly noiseless link keeps full precision.
    auto clean = noisy_pair(4000, {2.0, 1.0}, 1e-16, 2);
    auto mc = moments(clean, 0, 4000);
    CHECK(mc.resid / mc.n == Approx(1e-16).epsilon(0.1));
}

TEST_CASE("rates - Degenerate moments")
{
    auto s = noisy_pair(100, 1.0, 0.0, 3);
    for (std::size_t i = 0; i < 100; ++i)
        s.y[i] = cplx(0.0, 2.0) * s.x[i];
    UserMoments m = moments(s, 0, 100);
    m.resid = 0.0;
    CHECK_THROWS_AS(rate_from_moments(m), Error);
    try
    {
        sinr_from_moments(UserMoments{});
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::DegenerateMoments);
    }

    MomentAccumulator acc;
    acc.add_trial(0, {moments(noisy_pair(50, 1.0, 1.0, 4), 0, 50)});
    CHECK_THROWS_AS(empirical_rate(acc, 0), Error);
    CHECK_THROWS_AS(acc.add_trial(0, {UserMoments{}}), Error);
    CHECK_THROWS_AS(acc.add_trial(1, {UserMoments{}, UserMoments{}}), Error);
}

TEST_CASE("rates - Jackknife over trials")
{
    MomentAccumulator acc, shuffled;
    std::vector<Samples> trials;
    for (int t = 0; t < 12; ++t)
        trials.push_back(noisy_pair(400, {1.0, 0.2}, 0.3 + 0.05 * t, 100 + std::uint64_t(t)));
    for (int t = 0; t < 12; ++t)
        acc.add_trial(std::uint64_t(t), {moments(trials[std::size_t(t)], 0, 400)});
    for (int t : {5, 2, 11, 0, 7, 1, 9, 3, 10, 4, 8, 6})
        shuffled.add_trial(std::uint64_t(t), {moments(trials[std::size_t(t)], 0, 400)});

    // Oracle: recompute every leave-one-out rate from raw samples.
    std::vector<double> loo;
    for (int drop = 0; drop < 12; ++drop)
    {
        std::vector<cplx> x, y;
        for (int t = 0; t < 12; ++t)
            if (t != drop)
            {
                x.insert(x.end(), trials[std::size_t(t)].x.begin(), trials[std::size_t(t)].x.end());
                y.insert(y.end(), trials[std::size_t(t)].y.begin(), trials[std::size_t(t)].y.end());
            }
        loo.push_back(rate_oracle(x, y));
    }
    double mean = 0.0, ss = 0.0;
    for (double v : loo)
        mean += v / 12.0;
    for (double v : loo)
        ss += (v - mean) * (v - mean);
    const double se = std::sqrt(11.0 / 12.0 * ss);

    RateEstimate r = empirical_rate(acc, 0);
    CHECK(r.trials == 12);
    CHECK(r.std_error == Approx(se).epsilon(1e-9));
    CHECK(r.std_error > 0.0);
    RateEstimate rs = empirical_rate(shuffled, 0);
    CHECK(rs.rate == r.rate);
    CHECK(rs.std_error == r.std_error);

    CHECK(jackknife_std_error({1.0, 2.0, 3.0}) == Approx(std::sqrt(2.0 / 3.0 * 2.0)).epsilon(1e-14));
    CHECK(jackknife_std_error({4.0}) == 0.0);

    // Paired differences.
    auto same = paired_rate_difference(acc, shuffled, 0);
    CHECK(same.difference == 0.0);
    CHECK(same.std_error == 0.0);
    CHECK(same.independent_std_error > 0.0);
    MomentAccumulator partial;
    partial.add_trial(0, {moments(trials[0], 0, 400)});
    partial.add_trial(1, {moments(trials[1], 0, 400)});
    CHECK_THROWS_AS(paired_rate_difference(acc, partial, 0), Error);

    MomentAccumulator left, right;
    for (int t = 0; t < 6; ++t)
        left.add_trial(std::uint64_t(t), {moments(trials[std::size_t(t)], 0, 400)});
    for (int t = 6; t < 12; ++t)
        right.add_trial(std::uint64_t(t), {moments(trials[std::size_t(t)], 0, 400)});
    right.count_aborted(2);
    right.merge(left);
    CHECK(right.trials() == 12);
    CHECK(right.aborted() == 2);
    CHECK(empirical_rate(right, 0).rate == r.rate);
}

TEST_CASE("rates - Single-carrier and OFDM moments")
{
    std::mt19937_64 g(8);
    SigMat xt(3, 64), yt(3, 64);
    for (auto &v : xt.reshaped())
        v = oracle::random_vector(g, 1)[0];
    for (auto &v : yt.reshaped())
        v = oracle::random_vector(g, 1)[0];
    CHECK(sc_ofdm_equivalence(xt, yt, unitary_dft_rows(xt), unitary_dft_rows(yt)) < 1e-10);
    CHECK(sc_ofdm_equivalence(xt, yt, xt, unitary_dft_rows(yt)) > 1e-3);
    CHECK_THROWS_AS(sc_ofdm_equivalence(xt, yt, xt.leftCols(3), yt), Error);
}

TEST_CASE("rates - Closed forms")
{
    SystemConfig c = fig5_config(5, 20);
    RVec mrc = closed_form_rate(c, CombinerKind::MRC);
    CHECK(mrc(0) == Approx(std::log2(1.0 + (2.0 / pi) * 1280.0 / 51.0)).epsilon(1e-12));
    CHECK(std::abs(mrc(0) - 4.086) < 1e-3);
    RVec zfc = closed_form_rate(c, CombinerKind::ZFC);
    CHECK(zfc(0) == Approx(std::log2(1.0 + (2.0 / pi) * 1230.0 / (1.0 + 50.0 * (1.0 - 2.0 / pi)))).epsilon(1e-12));
    CHECK(std::abs(zfc(0) - 5.387) < 1e-3);
    SystemConfig u = c;
    u.quantized = false;
    CHECK(std::abs(closed_form_rate(u, CombinerKind::MRC)(0) - 4.706) < 1e-3);
    CHECK(closed_form_rate(u, CombinerKind::ZFC)(0) == Approx(std::log2(1.0 + 1230.0)).epsilon(1e-12));
    for (int k = 1; k < 5; ++k)
        CHECK(mrc(k) == mrc(0));

    // Breakdown terms sum to the denominator.
    SystemConfig e = make_equal_power_config(32, 3, 4, 2.0, 2, CombinerKind::MRC);
    e.users[1].beta = 0.3;
    e.users[2].power = 4.0;
    const RVec cq = config_quality(e);
    for (auto kind : {CombinerKind::MRC, CombinerKind::ZFC})
        for (int k = 0; k < 3; ++k)
        {
            auto b = closed_form_breakdown(e, cq, char_params(kind, 32, 3), k);
            CHECK(std::abs(b.interference + b.estimation_error + b.noise + b.quantization - b.denominator) <
                  1e-9 * b.denominator);
            CHECK(b.sinr == Approx(b.signal / b.denominator).epsilon(1e-14));
            CHECK(b.rate >= 0.0);
            CHECK(b.quantization == Approx(q_limit(e)).epsilon(1e-14));
            CHECK(b.estimation_error == Approx((1.0 - cq(0)) * e.users[0].rx_power() +
                                               (1.0 - cq(1)) * e.users[1].rx_power() +
                                               (1.0 - cq(2)) * e.users[2].rx_power())
                                            .epsilon(1e-12));
        }
    CHECK_THROWS_AS(closed_form_breakdown(e, RVec::Ones(2), char_params(CombinerKind::MRC, 32, 3), 0), Error);
    CHECK_THROWS_AS(char_params(CombinerKind::RZFC, 32, 3), Error);

    // Doubling M doubles the MRC signal term; the distortion term does not move.
    SystemConfig d = e;
    d.antennas = 64;
    for (int k = 0; k < 3; ++k)
    {
        auto b32 = closed_form_breakdown(e, cq, char_params(CombinerKind::MRC, 32, 3), k);
        auto b64 = closed_form_breakdown(d, cq, char_params(CombinerKind::MRC, 64, 3), k);
        CHECK(b64.signal == Approx(2.0 * b32.signal).epsilon(1e-14));
        CHECK(b64.quantization == b32.quantization);
        CHECK(b64.denominator == b32.denominator);
    }

    // Loss factors.
    CHECK(loss_factor(1.0) == Approx(2.0 / pi).epsilon(1e-15));
    CHECK(linear_to_db(loss_factor(1.0)) == Approx(-1.961).epsilon(1e-3));
    const double delta = quality_ratio(1, 1, make_equal_power_config(128, 5, 20, 10.0));
    CHECK(loss_factor(delta) == Approx(4.0 / (pi * pi)).epsilon(1e-12));
    CHECK(linear_to_db(loss_factor(delta)) == Approx(-3.92).epsilon(1e-3));
}

TEST_CASE("rates - Rate ceiling")
{
    SystemConfig c = make_equal_power_config(128, 5, 20, 10.0, 1, CombinerKind::ZFC);
    const double ceiling = rate_ceiling(c);
    // Equal powers, uniform profile: log2(1 + N_p (M - K) / ((pi/2 - 1) K (N_p + (pi/2) K L))).
    const double oracle = std::log2(1.0 + 100.0 * 123.0 / ((pi / 2.0 - 1.0) * 5.0 * (100.0 + pi / 2.0 * 100.0)));
    CHECK(ceiling == Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(ceiling - 4.151) < 1e-3);

    // The ceiling is the closed form at enormous SNR and bounds it from above.
    SystemConfig huge = make_equal_power_config(128, 5, 20, 150.0, 1, CombinerKind::ZFC);
    CHECK(closed_form_rate(huge, CombinerKind::ZFC)(0) == Approx(ceiling).epsilon(1e-9));
    double prev = 0.0;
    for (double snr = -20.0; snr <= 40.0; snr += 5.0)
    {
        SystemConfig s = make_equal_power_config(128, 5, 20, snr, 1, CombinerKind::ZFC);
        const double r = closed_form_rate(s, CombinerKind::ZFC)(0);
        CHECK(r < ceiling);
        CHECK(r > prev);
        prev = r;
    }
    // Unquantized ZFC grows without bound.
    SystemConfig u = huge;
    u.quantized = false;
    CHECK(closed_form_rate(u, CombinerKind::ZFC)(0) > 40.0);

    auto b = rate_baselines(c);
    CHECK(b.ceiling == ceiling);
    CHECK(b.mrc(0) == closed_form_rate(c, CombinerKind::MRC)(0));
    CHECK(b.zfc0(0) > b.zfc(0));
    CHECK(b.mrc0(0) > b.mrc(0));
    CHECK(b.loss_factor == Approx(4.0 / (pi * pi)).epsilon(1e-12));
}

TEST_CASE("rates - Characteristic parameters by Monte Carlo")
{
    const RVec ones = RVec::Ones(4);
    auto mrc = characteristic_params_empirical(CombinerKind::MRC, 64, ones, 0.0, 3000);
    auto zfc = characteristic_params_empirical(CombinerKind::ZFC, 64, ones, 0.0, 3000);
    auto rz0 = characteristic_params_empirical(CombinerKind::RZFC, 64, ones, 1e-9, 3000);
    for (int k = 0; k < 4; ++k)
    {
        CHECK(std::abs(mrc.G(k) - 64.0) < 2.0);
        CHECK(std::abs(zfc.G(k) - 60.0) < 2.0);
        CHECK(std::abs(rz0.G(k) - 60.0) < 2.0);
        for (int j = 0; j < 4; ++j)
        {
            CHECK(std::abs(mrc.I(k, j) - 1.0) < 0.05);
            CHECK(std::abs(zfc.I(k, j)) < 0.02);
            CHECK(std::abs(rz0.I(k, j)) < 0.02);
        }
    }

    // RZFC sits between the two at moderate regularisation.
    auto rz = characteristic_params_empirical(CombinerKind::RZFC, 16, RVec::Ones(4), 4.0, 2000);
    auto z16 = char_params(CombinerKind::ZFC, 16, 4);
    CHECK(rz.I(0, 1) > 0.0);
    CHECK(rz.I(0, 1) < 1.0);
    CHECK(rz.G(0) > z16.G(0));

    // Closed-form rate with RZFC uses the Monte-Carlo parameters and lies near ZFC for small lambda.
    SystemConfig c = fig5_config(5, 20);
    c.combiner = {CombinerKind::RZFC, 1e-6};
    CHECK(closed_form_rate(c, CombinerKind::RZFC)(0) == Approx(closed_form_rate(c, CombinerKind::ZFC)(0)).epsilon(0.01));
}

TEST_CASE("rates - Weak user")
{
    // One user at -10 dB among four at 0 dB, against the same user in an all -10 dB system.
    for (int M : {32, 64, 128})
        for (auto kind : {CombinerKind::MRC, CombinerKind::ZFC})
        {
            SystemConfig mixed = make_equal_power_config(M, 5, 20, 0.0, 1, kind);
            mixed.users[0].power = 0.1;
            SystemConfig equal = make_equal_power_config(M, 5, 20, -10.0, 1, kind);
            CHECK(closed_form_rate(mixed, kind)(0) < closed_form_rate(equal, kind)(0));
            CHECK(closed_form_rate(mixed, kind)(0) < closed_form_rate(mixed, kind)(1));
        }
}

TEST_CASE("rates - Antenna search")
{
    auto lin = [](int M) { return 0.5 * M; };
    CHECK(smallest_antennas(lin, 10.0, 1, 100) == 20);
    CHECK(smallest_antennas(lin, 10.1, 1, 100) == 21);
    CHECK(smallest_antennas(lin, 0.1, 1, 100) == 1);
    CHECK(smallest_antennas(lin, 51.0, 1, 100) == -1);
    auto lg = [](int M) { return std::log2(1.0 + 0.3 * M); };
    for (double target : {1.0, 3.3, 7.0})
    {
        int brute = -1;
        for (int M = 1; M <= 5000; ++M)
            if (lg(M) >= target)
            {
                brute = M;
                break;
            }
        CHECK(smallest_antennas(lg, target, 1, 5000) == brute);
    }

    SystemConfig c = make_equal_power_config(100, 5, 20, 0.0, 1, CombinerKind::MRC);
    for (auto kind : {CombinerKind::MRC, CombinerKind::ZFC})
    {
        auto a = antenna_cost(c, kind, 0);
        REQUIRE(a.quantized_antennas > 0);
        CHECK(a.unquantized_antennas == 100);
        CHECK(a.ratio == Approx(a.quantized_antennas / 100.0).epsilon(1e-15));
        SystemConfig q = c;
        q.antennas = a.quantized_antennas;
        CHECK(closed_form_rate(q, config_quality(c), kind)(0) >= a.target_rate);
        q.antennas -= 1;
        CHECK(closed_form_rate(q, config_quality(c), kind)(0) < a.target_rate);
        CHECK(a.ratio > 1.0);
    }
}

TEST_CASE("rates - Empirical rates")
{
    // Noiseless, unquantized, perfect CSI ZFC: essentially interference free.
    SystemConfig c = make_equal_power_config(8, 2, 3, 0.0, 1, CombinerKind::ZFC);
    c.noise_floor = 0.0;
    for (auto &u : c.users)
        u = {1.0, 1.0};
    c.quantized = false;
    c.csi = CsiMode::Perfect;
    c.data_len = 64;
    auto setup = prepare_simulation(c, {CombinerKind::ZFC}, 10000);
    auto r = run_trials(setup, 1, 0, 4);
    CHECK(empirical_rate(r.moments[0], 0).rate > 30.0);
    CHECK(empirical_rate(r.moments[0], 1).rate > 30.0);

    // Quantized MRC at L = 1 sits below its limit and the median gap closes as L grows. Trial-to-trial
    // channel spread is about 0.015 bpcu, so the last step (about 0.01) is only checked to within 2 SE.
    std::vector<double> gaps, se;
    for (int L : {1, 2, 4, 6, 10, 15})
    {
        SystemConfig f = fig5_config(5, L);
        auto s = prepare_simulation(f, {CombinerKind::MRC}, 20000);
        auto res = run_trials(s, 31, std::uint64_t(L), 80);
        const double limit = closed_form_rate(f, CombinerKind::MRC)(0);
        std::vector<double> per;
        double pooled_se = 0.0;
        for (int k = 0; k < 5; ++k)
        {
            pooled_se += empirical_rate(res.moments[0], k).std_error / 5.0;
            for (const auto &m : res.moments[0].per_trial(k))
                per.push_back(limit - rate_from_moments(m));
        }
        std::nth_element(per.begin(), per.begin() + long(per.size() / 2), per.end());
        gaps.push_back(per[per.size() / 2]);
        se.push_back(pooled_se);
    }
    UNSCOPED_INFO("median gaps " << gaps[0] << " " << gaps[1] << " " << gaps[2] << " " << gaps[3] << " " << gaps[4]
                                 << " " << gaps[5]);
    CHECK(gaps[0] > 0.3);
    for (std::size_t i = 1; i + 1 < gaps.size(); ++i)
        CHECK(gaps[i] < gaps[i - 1]);
    CHECK(gaps[5] < gaps[4] + 2.0 * se[5]);
    CHECK(std::abs(gaps.back()) < 0.1);
}

TEST_CASE("rates - Thread-count independence")
{
    SystemConfig c = make_equal_power_config(16, 3, 4, 5.0, 1, CombinerKind::ZFC);
    c.data_len = 64;
    auto setup = prepare_simulation(c, {CombinerKind::MRC, CombinerKind::ZFC}, 10000);
    TrialOptions opts;
    opts.audit = true;
    auto one = run_trials(setup, 77, 2, 9, 1, opts);
    auto three = run_trials(setup, 77, 2, 9, 3, opts);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 3; ++k)
        {
            auto a = one.moments[std::size_t(i)].total(k), b = three.moments[std::size_t(i)].total(k);
            CHECK(a.sxx == b.sxx);
            CHECK(a.sxy == b.sxy);
            CHECK(a.syy == b.syy);
            CHECK(a.resid == b.resid);
            CHECK(empirical_rate(one.moments[std::size_t(i)], k).std_error ==
                  empirical_rate(three.moments[std::size_t(i)], k).std_error);
        }
    CHECK(one.audit.second_moments(0) == three.audit.second_moments(0));
    for (std::size_t t = 0; t < one.estimation_mse.size(); ++t)
        CHECK(one.estimation_mse[t] == three.estimation_mse[t]);
}

TEST_CASE("rates - Decomposition audit bookkeeping")
{
    std::mt19937_64 g(5);
    const long n = 20000;
    std::vector<std::vector<cplx>> comps;
    for (int i = 0; i < AuditCount; ++i)
        comps.push_back(oracle::random_vector(g, std::size_t(n)));
    const cplx *ptr[AuditCount];
    for (int i = 0; i < AuditCount; ++i)
        ptr[i] = comps[std::size_t(i)].data();
    AuditAccumulator a(1), b(1);
    a.add(0, ptr, n / 2);
    for (int i = 0; i < AuditCount; ++i)
        ptr[i] += n / 2;
    b.add(0, ptr, n / 2);
    a.merge(b);
    auto rep = decomposition_audit(a, 0);
    CHECK(rep.samples == double(n));
    CHECK(rep.threshold == Approx(4.0 / std::sqrt(double(n))).epsilon(1e-15));
    CHECK(rep.max_offdiag < rep.threshold);
    for (int i = 0; i < AuditCount; ++i)
        CHECK(rep.second_moments(i, i).real() == Approx(1.0).epsilon(0.05));

    // A planted correlation between noise and quantization terms is detected.
    for (long s = 0; s < n; ++s)
        comps[AuditQuantization][std::size_t(s)] += 0.1 * comps[AuditNoise][std::size_t(s)];
    for (int i = 0; i < AuditCount; ++i)
        ptr[i] = comps[std::size_t(i)].data();
    AuditAccumulator c(1);
    c.add(0, ptr, n);
    auto bad = decomposition_audit(c, 0);
    CHECK(bad.max_offdiag > bad.threshold);
    CHECK(bad.correlation(AuditNoise, AuditQuantization) == Approx(0.1 / std::sqrt(1.01)).epsilon(0.15));

    CHECK_THROWS_AS(decomposition_audit(AuditAccumulator(1), 0), Error);
    AuditAccumulator two(2);
    CHECK_THROWS_AS(two.merge(a), Error);
}
