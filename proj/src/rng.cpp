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

#include "quantmimo/rng.hpp"

namespace qm
{
    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    Rng StreamFactory::stream(Purpose purpose, std::uint64_t index) const
    {
        std::uint64_t h = splitmix64(seed_);
        h = splitmix64(h ^ point_);
        h = splitmix64(h ^ trial_);
        h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
        h = splitmix64(h ^ index);
        std::uint64_t g = splitmix64(h);
        std::seed_seq seq{std::uint32_t(h), std::uint32_t(h >> 32), std::uint32_t(g), std::uint32_t(g >> 32)};
        return Rng(seq);
    }
}
