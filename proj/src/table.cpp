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

#include "quantmimo/table.hpp"
#include "quantmimo/common.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace qm
{
    Table::Table(std::vector<std::string> columns) : columns_(std::move(columns))
    {
        if (columns_.empty())
            throw Error(ErrorCode::EmptyInput, "table needs at least one column");
    }

    void Table::add_row(std::vector<Cell> cells)
    {
        if (cells.size() != columns_.size())
            throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(cells.size()) + " cells, table has " +
                                                          std::to_string(columns_.size()) + " columns");
        rows_.push_back(std::move(cells));
    }

    int Table::column(const std::string &name) const
    {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i] == name)
                return int(i);
        return -1;
    }

    std::string format_cell(const Cell &c)
    {
        if (std::holds_alternative<long long>(c))
            return std::to_string(std::get<long long>(c));
        if (std::holds_alternative<double>(c))
        {
            const double v = std::get<double>(c);
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            char buf[64];
            auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
            return std::string(buf, r.ptr);
        }
        if (std::holds_alternative<std::string>(c))
            return std::get<std::string>(c);
        return {};
    }

    std::optional<double> cell_number(const Cell &c)
    {
        if (std::holds_alternative<long long>(c))
            return double(std::get<long long>(c));
        if (std::holds_alternative<double>(c))
            return std::get<double>(c);
        return std::nullopt;
    }

    void Table::write_csv(std::ostream &out) const
    {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            out << (i ? "," : "") << columns_[i];
        out << '\n';
        for (const auto &r : rows_)
        {
            for (std::size_t i = 0; i < r.size(); ++i)
                out << (i ? "," : "") << format_cell(r[i]);
            out << '\n';
        }
    }

    void Table::write_json(std::ostream &out) const
    {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto &r : rows_)
        {
            nlohmann::ordered_json o;
            for (std::size_t i = 0; i < r.size(); ++i)
            {
                const Cell &c = r[i];
                if (std::holds_alternative<long long>(c))
                    o[columns_[i]] = std::get<long long>(c);
                else if (std::holds_alternative<double>(c) && std::isfinite(std::get<double>(c)))
                    o[columns_[i]] = std::get<double>(c);
                else if (std::holds_alternative<std::string>(c))
                    o[columns_[i]] = std::get<std::string>(c);
                else
                    o[columns_[i]] = nullptr;
            }
            arr.push_back(std::move(o));
        }
        out << arr.dump(1) << '\n';
    }

    Table Table::read_csv(std::istream &in)
    {
        auto split = [](const std::string &line)
        {
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string s;
            while (std::getline(ss, s, ','))
                f.push_back(s);
            if (!line.empty() && line.back() == ',')
                f.emplace_back();
            return f;
        };
        std::string line;
        if (!std::getline(in, line) || line.empty())
            throw Error(ErrorCode::EmptyInput, "CSV has no header");
        Table t(split(line));
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            auto f = split(line);
            std::vector<Cell> cells;
            for (auto &s : f)
            {
                if (s.empty())
                {
                    cells.emplace_back();
                    continue;
                }
                double v = 0.0;
                auto r = std::from_chars(s.data(), s.data() + s.size(), v);
                if (r.ec == std::errc() && r.ptr == s.data() + s.size())
                    cells.emplace_back(v);
                else
                    cells.emplace_back(s);
            }
            t.add_row(std::move(cells));
        }
        return t;
    }
}
