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

#ifndef QUANTMIMO_TABLE_HPP
#define QUANTMIMO_TABLE_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qm
{
    // A table cell: empty (missing value), integer, real or text.
    using Cell = std::variant<std::monostate, long long, double, std::string>;

    // Column-ordered result table with CSV and JSON emitters. Reals are printed with 17
    // significant digits so a reread reproduces the exact double.
    class Table
    {
    public:
        Table() = default;
        explicit Table(std::vector<std::string> columns);

        const std::vector<std::string> &columns() const { return columns_; }
        std::size_t rows() const { return rows_.size(); }
        const std::vector<Cell> &row(std::size_t i) const { return rows_[i]; }

        void add_row(std::vector<Cell> cells);
        int column(const std::string &name) const; // -1 if absent

        void write_csv(std::ostream &out) const;
        void write_json(std::ostream &out) const; // array of row objects

        // Parses what write_csv produced; numeric-looking fields become doubles.
        static Table read_csv(std::istream &in);

    private:
        std::vector<std::string> columns_;
        std::vector<std::vector<Cell>> rows_;
    };

    std::string format_cell(const Cell &c);
    std::optional<double> cell_number(const Cell &c);
}

#endif
