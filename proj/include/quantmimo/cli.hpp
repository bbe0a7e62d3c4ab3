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

#ifndef QUANTMIMO_CLI_HPP
#define QUANTMIMO_CLI_HPP

#include <iosfwd>

namespace qm
{
    // Exit codes: 0 success, 1 numerical failure (per-point report on stderr), 2 usage,
    // configuration or validation error.
    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
}

#endif
