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

#ifndef QUANTMIMO_RNG_HPP
#define QUANTMIMO_RNG_HPP

#include "quantmimo/common.hpp"

#include <cstdint>
#include <random>

namespace qm
{
    using Rng = std::mt19937_64;

    // What a substream is used for. Each purpose gets its own family of streams so that, for
    // example, switching the pilot phase mode never perturbs the channel draws.
    enum class Purpose : std::uint64_t
    {
        Channel = 1,
        PilotPhases = 2,
        PilotNoise = 3,
        DataSymbols = 4,
        DataNoise = 5,
        Moments = 6,
        Ensemble = 7,
        Misc = 8
    };

    std::uint64_t splitmix64(std::uint64_t x);

    // Deterministic substreams keyed by (seed, point, trial). Streams for different keys are
    // statistically independent and do not depend on execution order or thread count.
    class StreamFactory
    {
    public:
        StreamFactory(std::uint64_t seed, std::uint64_t point = 0, std::uint64_t trial = 0)
            : seed_(seed), point_(point), trial_(trial) {}

        Rng stream(Purpose purpose, std::uint64_t index = 0) const;

        StreamFactory with_trial(std::uint64_t trial) const { return {seed_, point_, trial}; }
        StreamFactory with_point(std::uint64_t point) const { return {seed_, point, trial_}; }

        std::uint64_t seed() const { return seed_; }
        std::uint64_t point() const { return point_; }
        std::uint64_t trial() const { return trial_; }

    private:
        std::uint64_t seed_, point_, trial_;
    };

    // CN(0, variance)
    inline cplx complex_normal(Rng &rng, double variance = 1.0)
    {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
        double re = n(rng);
        double im = n(rng);
        return {re, im};
    }

    inline double uniform01(Rng &rng)
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
}

#endif
