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

#ifndef QUANTMIMO_SYSCONFIG_HPP
#define QUANTMIMO_SYSCONFIG_HPP

#include "quantmimo/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qm
{
    struct PowerDelayProfile
    {
        std::vector<double> taps; // p[0..L-1], sums to one

        int length() const { return int(taps.size()); }
        double max_tap() const;
    };

    PowerDelayProfile make_uniform_pdp(int L);
    PowerDelayProfile make_exponential_pdp(int L, double decay);

    struct UserLinkBudget
    {
        double beta = 1.0;  // large-scale gain
        double power = 1.0; // transmit power

        double rx_power() const { return beta * power; }
        double snr(double noise_floor) const { return beta * power / noise_floor; }
    };

    enum class Waveform
    {
        SingleCarrier,
        OFDM
    };

    enum class CombinerKind
    {
        MRC,
        ZFC,
        RZFC
    };

    struct CombinerSpec
    {
        CombinerKind kind = CombinerKind::ZFC;
        std::optional<double> lambda; // RZFC only; unset means the documented default
    };

    enum class CsiMode
    {
        Estimated,
        Perfect
    };

    enum class Alphabet
    {
        Gaussian,
        QPSK,
        QAM16 // unit-power square 16-QAM
    };

    enum class PhaseMode
    {
        Random,
        Constant
    };

    // Which quantizer statistics feed the LMMSE scale.
    //   Statistical: rho from the Monte-Carlo E[sqrt(P_rx)], Q from the limit Q'
    //   Limit:       rho' and Q'
    //   Empirical:   per-trial rho-hat and E-hat measured on the pilot block
    enum class EstimatorStats
    {
        Statistical,
        Limit,
        Empirical
    };

    struct SystemConfig
    {
        int antennas = 128;
        std::vector<UserLinkBudget> users;
        PowerDelayProfile pdp;
        double noise_floor = 1.0;
        int pilot_len = 0;
        int data_len = 256;
        Waveform waveform = Waveform::OFDM;
        CombinerSpec combiner;
        bool quantized = true;
        std::uint64_t seed = 1;

        CsiMode csi = CsiMode::Estimated;
        Alphabet alphabet = Alphabet::Gaussian;
        PhaseMode pilot_phases = PhaseMode::Random;
        EstimatorStats estimator_stats = EstimatorStats::Statistical;

        int M() const { return antennas; }
        int K() const { return int(users.size()); }
        int L() const { return pdp.length(); }
        double mu() const { return double(pilot_len) / (double(K()) * double(L())); }
    };

    // Equal-power scenario with uniform PDP and N_p = mu K L.
    SystemConfig make_equal_power_config(int M, int K, int L, double snr_db, int mu = 1,
                                         CombinerKind kind = CombinerKind::ZFC, double noise_floor = 1.0);

    struct ValidationIssue
    {
        ErrorCode code;
        std::string detail;
    };

    struct ValidationReport
    {
        std::vector<ValidationIssue> issues;

        bool ok() const { return issues.empty(); }
        bool has(ErrorCode code) const;
        std::string message() const;
    };

    ValidationReport validate(const SystemConfig &config);

    // Throws Error carrying the first issue's code; the message lists all of them.
    const SystemConfig &require_valid(const SystemConfig &config);

    double mean_rx_power(const SystemConfig &config); // N0 + sum beta_k P_k
    double total_user_power(const SystemConfig &config);

    const char *to_string(Waveform w);
    const char *to_string(CombinerKind k);
    const char *to_string(CsiMode c);
    const char *to_string(Alphabet a);
    const char *to_string(PhaseMode p);
    const char *to_string(EstimatorStats s);

    // JSON ingestion. Scalar powers accept a "_db" suffixed key as an alternative to the linear key.
    SystemConfig config_from_json(const nlohmann::json &doc);
    SystemConfig load_config(const std::string &path);
    nlohmann::json config_to_json(const SystemConfig &config);

    // 64-bit FNV-1a of the canonical JSON dump, hex encoded.
    std::string config_hash(const SystemConfig &config);
}

#endif
