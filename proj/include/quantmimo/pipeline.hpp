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

#ifndef QUANTMIMO_PIPELINE_HPP
#define QUANTMIMO_PIPELINE_HPP

#include "quantmimo/chest.hpp"
#include "quantmimo/combine.hpp"
#include "quantmimo/linksim.hpp"
#include "quantmimo/rates.hpp"
#include "quantmimo/sysconfig.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qm
{
    // Everything that is computed once per configuration before trials fan out.
    struct SimulationSetup
    {
        SystemConfig config;
        SqrtPowerMoment pilot_moment;
        SqrtPowerMoment data_moment;
        ScaleStats pilot_stats; // prior statistics handed to the estimator
        double rho_data = 0.0;  // rho of the data block (closed form)
        RVec quality;           // c_k used for normalisation (1 for perfect CSI)
        double lambda = 0.0;
        std::vector<CombinerKind> combiners;
        std::vector<RVec> alpha; // ensemble normalisation per combiner
    };

    SimulationSetup prepare_simulation(const SystemConfig &config, std::vector<CombinerKind> combiners,
                                       long moment_samples = 100000);

    struct TrialOptions
    {
        bool audit = false;        // decomposition components for the first combiner
        bool keep_symbols = false; // s and s^ for the first combiner
        bool estimation_only = false; // stop after channel estimation
    };

    struct TrialResult
    {
        std::uint64_t trial = 0;
        std::vector<std::vector<UserMoments>> moments; // per combiner, per user
        std::vector<std::string> errors;               // per combiner, empty when fine
        RVec estimation_mse;                           // per user, estimated CSI only
        ScaleStats stats;                              // statistics the estimator used
        AuditAccumulator audit;
        SigMat symbols, estimates;
    };

    TrialResult simulate_trial(const SimulationSetup &setup, const StreamFactory &streams, const TrialOptions &opts = {});

    struct SimulationResult
    {
        std::vector<MomentAccumulator> moments; // per combiner
        std::vector<std::vector<std::string>> errors;
        AuditAccumulator audit;
        std::vector<RVec> estimation_mse; // per trial
        std::vector<TrialResult> kept;    // only when keep_symbols
    };

    // Runs trials [0, trials) of grid point `point` on `threads` workers. Output is independent of
    // the thread count.
    SimulationResult run_trials(const SimulationSetup &setup, std::uint64_t seed, std::uint64_t point, int trials,
                                int threads = 1, const TrialOptions &opts = {});

    // Mean and jackknife-free standard error of per-trial values.
    struct MeanSe
    {
        double mean = 0.0;
        double std_error = 0.0;
    };

    MeanSe mean_and_se(const std::vector<double> &v);
}

#endif
