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

#include "quantmimo/sysconfig.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qm
{
    const char *error_name(ErrorCode code)
    {
        switch (code)
        {
        case ErrorCode::PilotTooShort: return "PilotTooShort";
        case ErrorCode::PilotNotCombAligned: return "PilotNotCombAligned";
        case ErrorCode::TooFewAntennas: return "TooFewAntennas";
        case ErrorCode::BadProfile: return "BadProfile";
        case ErrorCode::DataTooShort: return "DataTooShort";
        case ErrorCode::BadLinkBudget: return "BadLinkBudget";
        case ErrorCode::BadDimensions: return "BadDimensions";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::ConfigParse: return "ConfigParse";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::DegenerateMoments: return "DegenerateMoments";
        case ErrorCode::Io: return "Io";
        }
        return "Unknown";
    }

    bool is_numerical(ErrorCode code)
    {
        return code == ErrorCode::SingularGram || code == ErrorCode::DegenerateMoments;
    }

    double PowerDelayProfile::max_tap() const
    {
        return taps.empty() ? 0.0 : *std::max_element(taps.begin(), taps.end());
    }

    PowerDelayProfile make_uniform_pdp(int L)
    {
        if (L < 1)
            throw Error(ErrorCode::InvalidArgument, "PDP length must be at least 1");
        return {std::vector<double>(std::size_t(L), 1.0 / double(L))};
    }

    PowerDelayProfile make_exponential_pdp(int L, double decay)
    {
        if (L < 1)
            throw Error(ErrorCode::InvalidArgument, "PDP length must be at least 1");
        if (!(decay > 0.0))
            throw Error(ErrorCode::InvalidArgument, "PDP decay must be positive");
        std::vector<double> p(static_cast<std::size_t>(L));
        double sum = 0.0;
        for (int l = 0; l < L; ++l)
            sum += p[std::size_t(l)] = std::exp(-double(l) / decay);
        for (auto &v : p)
            v /= sum;
        return {p};
    }

    SystemConfig make_equal_power_config(int M, int K, int L, double snr_db, int mu, CombinerKind kind, double noise_floor)
    {
        SystemConfig c;
        c.antennas = M;
        c.noise_floor = noise_floor;
        c.users.assign(std::size_t(K), UserLinkBudget{1.0, db_to_linear(snr_db) * noise_floor});
        c.pdp = make_uniform_pdp(L);
        c.pilot_len = mu * K * L;
        c.data_len = std::max(256, L);
        c.combiner.kind = kind;
        return c;
    }

    bool ValidationReport::has(ErrorCode code) const
    {
        return std::any_of(issues.begin(), issues.end(), [code](const ValidationIssue &i)
                           { return i.code == code; });
    }

    std::string ValidationReport::message() const
    {
        std::string s;
        for (const auto &i : issues)
        {
            if (!s.empty())
                s += "; ";
            s += std::string(error_name(i.code)) + " (" + i.detail + ")";
        }
        return s;
    }

    ValidationReport validate(const SystemConfig &c)
    {
        ValidationReport r;
        auto add = [&r](ErrorCode code, std::string detail)
        { r.issues.push_back({code, std::move(detail)}); };

        const int K = c.K(), L = c.L();

        if (c.antennas < 1)
            add(ErrorCode::BadDimensions, "antennas must be positive");
        if (K < 1)
            add(ErrorCode::BadDimensions, "at least one user is required");
        if (c.pilot_len < 1)
            add(ErrorCode::BadDimensions, "pilot length must be positive");
        if (c.data_len < 1)
            add(ErrorCode::BadDimensions, "data length must be positive");

        if (L < 1)
            add(ErrorCode::BadProfile, "empty power delay profile");
        else
        {
            double sum = 0.0;
            bool negative = false;
            for (double p : c.pdp.taps)
            {
                negative |= !(p >= 0.0);
                sum += p;
            }
            if (negative)
                add(ErrorCode::BadProfile, "negative or non-finite tap power");
            else if (std::abs(sum - 1.0) > 1e-12)
                add(ErrorCode::BadProfile, "taps sum to " + std::to_string(sum) + ", not 1");
        }

        for (std::size_t k = 0; k < c.users.size(); ++k)
            if (!(c.users[k].beta > 0.0) || !(c.users[k].power > 0.0) || !std::isfinite(c.users[k].rx_power()))
                add(ErrorCode::BadLinkBudget, "user " + std::to_string(k + 1) + " needs beta > 0 and power > 0");
        if (!(c.noise_floor >= 0.0) || !std::isfinite(c.noise_floor))
            add(ErrorCode::BadLinkBudget, "noise floor must be nonnegative");

        if (K >= 1 && L >= 1)
        {
            if (c.pilot_len < K * L)
                add(ErrorCode::PilotTooShort, "N_p = " + std::to_string(c.pilot_len) + " < K L = " + std::to_string(K * L));
            if (c.pilot_len % K != 0)
                add(ErrorCode::PilotNotCombAligned, "N_p = " + std::to_string(c.pilot_len) + " is not a multiple of K = " + std::to_string(K));
        }
        if (L >= 1 && c.data_len < L)
            add(ErrorCode::DataTooShort, "N_d = " + std::to_string(c.data_len) + " < L = " + std::to_string(L));

        if (c.combiner.kind != CombinerKind::MRC && c.antennas < K)
            add(ErrorCode::TooFewAntennas, "M = " + std::to_string(c.antennas) + " < K = " + std::to_string(K));
        if (c.combiner.lambda && !(*c.combiner.lambda >= 0.0))
            add(ErrorCode::InvalidArgument, "regularisation must be nonnegative");
        return r;
    }

    const SystemConfig &require_valid(const SystemConfig &config)
    {
        auto r = validate(config);
        if (!r.ok())
            throw Error(r.issues.front().code, r.message());
        return config;
    }

    double total_user_power(const SystemConfig &config)
    {
        double s = 0.0;
        for (const auto &u : config.users)
            s += u.rx_power();
        return s;
    }

    double mean_rx_power(const SystemConfig &config)
    {
        return config.noise_floor + total_user_power(config);
    }

    const char *to_string(Waveform w) { return w == Waveform::OFDM ? "ofdm" : "single_carrier"; }

    const char *to_string(CombinerKind k)
    {
        switch (k)
        {
        case CombinerKind::MRC: return "mrc";
        case CombinerKind::ZFC: return "zfc";
        case CombinerKind::RZFC: return "rzfc";
        }
        return "?";
    }

    const char *to_string(CsiMode c) { return c == CsiMode::Perfect ? "perfect" : "estimated"; }
    const char *to_string(Alphabet a)
    {
        switch (a)
        {
        case Alphabet::QPSK:
            return "qpsk";
        case Alphabet::QAM16:
            return "qam16";
        default:
            return "gaussian";
        }
    }
    const char *to_string(PhaseMode p) { return p == PhaseMode::Constant ? "constant" : "random"; }

    const char *to_string(EstimatorStats s)
    {
        switch (s)
        {
        case EstimatorStats::Statistical: return "statistical";
        case EstimatorStats::Limit: return "limit";
        case EstimatorStats::Empirical: return "empirical";
        }
        return "?";
    }

    // ---------------------------------------------------------------------------------------------
    // JSON

    namespace
    {
        using nlohmann::json;

        [[noreturn]] void parse_fail(const std::string &msg) { throw Error(ErrorCode::ConfigParse, msg); }

        template <typename E, std::size_t N>
        E parse_enum(const json &v, const char *key, const std::pair<const char *, E> (&table)[N])
        {
            if (!v.is_string())
                parse_fail(std::string(key) + " must be a string");
            std::string s = v.get<std::string>();
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch)
                           { return char(std::tolower(ch)); });
            for (const auto &[name, value] : table)
                if (s == name)
                    return value;
            parse_fail(std::string("unknown value '") + s + "' for " + key);
        }

        double number(const json &v, const std::string &key)
        {
            if (!v.is_number())
                parse_fail(key + " must be a number");
            return v.get<double>();
        }

        // Looks up key or key_db; returns linear value.
        std::optional<double> linear(const json &obj, const std::string &key)
        {
            bool lin = obj.contains(key), db = obj.contains(key + "_db");
            if (lin && db)
                parse_fail("both " + key + " and " + key + "_db given");
            if (lin)
                return number(obj.at(key), key);
            if (db)
                return db_to_linear(number(obj.at(key + "_db"), key + "_db"));
            return std::nullopt;
        }

        int integer(const json &v, const std::string &key)
        {
            if (!v.is_number_integer())
                parse_fail(key + " must be an integer");
            return v.get<int>();
        }

        void check_keys(const json &obj, const std::set<std::string> &allowed, const std::string &where)
        {
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!allowed.count(it.key()))
                    parse_fail("unknown key '" + it.key() + "' in " + where);
        }

        UserLinkBudget parse_user(const json &u, double n0, std::optional<double> default_snr)
        {
            check_keys(u, {"beta", "beta_db", "power", "power_db", "snr", "snr_db"}, "user entry");
            UserLinkBudget b;
            b.beta = linear(u, "beta").value_or(1.0);
            auto p = linear(u, "power");
            auto snr = linear(u, "snr");
            if (p && snr)
                parse_fail("user entry gives both power and snr");
            if (p)
                b.power = *p;
            else if (snr)
                b.power = *snr * n0 / b.beta;
            else if (default_snr)
                b.power = *default_snr * n0 / b.beta;
            return b;
        }

        PowerDelayProfile parse_pdp(const json &v)
        {
            if (v.is_number_integer())
                return make_uniform_pdp(v.get<int>());
            if (v.is_array())
                return {v.get<std::vector<double>>()};
            if (!v.is_object())
                parse_fail("pdp must be an integer, an array or an object");
            check_keys(v, {"kind", "taps", "decay"}, "pdp");
            if (v.contains("taps") && v.at("taps").is_array())
                return {v.at("taps").get<std::vector<double>>()};
            if (!v.contains("taps"))
                parse_fail("pdp needs taps");
            int L = integer(v.at("taps"), "pdp.taps");
            std::string kind = v.value("kind", std::string("uniform"));
            if (kind == "uniform")
                return make_uniform_pdp(L);
            if (kind == "exponential")
                return make_exponential_pdp(L, v.contains("decay") ? number(v.at("decay"), "pdp.decay") : 1.0);
            parse_fail("unknown pdp kind '" + kind + "'");
        }
    }

    SystemConfig config_from_json(const nlohmann::json &doc)
    {
        using nlohmann::json;
        if (!doc.is_object())
            parse_fail("configuration must be a JSON object");
        check_keys(doc, {"antennas", "users", "snr", "snr_db", "pdp", "taps", "noise_floor", "noise_floor_db", "pilot_len", "mu",
                         "data_len", "waveform", "combiner", "lambda", "lambda_db", "quantized", "seed", "csi", "alphabet",
                         "pilot_phases", "estimator_stats"},
                   "configuration");

        static const std::pair<const char *, Waveform> waveforms[] = {
            {"ofdm", Waveform::OFDM}, {"single_carrier", Waveform::SingleCarrier}, {"sc", Waveform::SingleCarrier}};
        static const std::pair<const char *, CombinerKind> combiners[] = {
            {"mrc", CombinerKind::MRC}, {"zfc", CombinerKind::ZFC}, {"rzfc", CombinerKind::RZFC}};
        static const std::pair<const char *, CsiMode> csis[] = {{"estimated", CsiMode::Estimated}, {"perfect", CsiMode::Perfect}};
        static const std::pair<const char *, Alphabet> alphabets[] = {{"gaussian", Alphabet::Gaussian}, {"qpsk", Alphabet::QPSK}, {"qam16", Alphabet::QAM16}};
        static const std::pair<const char *, PhaseMode> phases[] = {{"random", PhaseMode::Random}, {"constant", PhaseMode::Constant}};
        static const std::pair<const char *, EstimatorStats> stats[] = {
            {"statistical", EstimatorStats::Statistical}, {"limit", EstimatorStats::Limit}, {"empirical", EstimatorStats::Empirical}};

        SystemConfig c;
        if (doc.contains("antennas"))
            c.antennas = integer(doc.at("antennas"), "antennas");
        c.noise_floor = linear(doc, "noise_floor").value_or(1.0);

        auto snr = linear(doc, "snr");
        if (!doc.contains("users"))
            parse_fail("users is required");
        const json &users = doc.at("users");
        if (users.is_number_integer())
        {
            int K = users.get<int>();
            if (K < 0)
                parse_fail("users must be nonnegative");
            c.users.assign(std::size_t(K), parse_user(json::object(), c.noise_floor, snr.value_or(1.0)));
        }
        else if (users.is_array())
        {
            for (const auto &u : users)
                c.users.push_back(parse_user(u, c.noise_floor, snr));
        }
        else
            parse_fail("users must be a count or an array of link budgets");

        if (doc.contains("pdp") && doc.contains("taps"))
            parse_fail("give either pdp or taps");
        if (doc.contains("pdp"))
            c.pdp = parse_pdp(doc.at("pdp"));
        else if (doc.contains("taps"))
            c.pdp = parse_pdp(doc.at("taps"));
        else
            c.pdp = make_uniform_pdp(1);

        if (doc.contains("pilot_len") && doc.contains("mu"))
            parse_fail("give either pilot_len or mu");
        if (doc.contains("pilot_len"))
            c.pilot_len = integer(doc.at("pilot_len"), "pilot_len");
        else
            c.pilot_len = (doc.contains("mu") ? integer(doc.at("mu"), "mu") : 1) * c.K() * c.L();

        c.data_len = doc.contains("data_len") ? integer(doc.at("data_len"), "data_len") : std::max(256, c.L());
        if (doc.contains("waveform"))
            c.waveform = parse_enum(doc.at("waveform"), "waveform", waveforms);

        if (doc.contains("combiner"))
        {
            const json &cb = doc.at("combiner");
            if (cb.is_string())
                c.combiner.kind = parse_enum(cb, "combiner", combiners);
            else if (cb.is_object())
            {
                check_keys(cb, {"kind", "lambda", "lambda_db"}, "combiner");
                if (!cb.contains("kind"))
                    parse_fail("combiner.kind is required");
                c.combiner.kind = parse_enum(cb.at("kind"), "combiner.kind", combiners);
                if (auto l = linear(cb, "lambda"))
                    c.combiner.lambda = *l;
            }
            else
                parse_fail("combiner must be a string or an object");
        }
        if (auto l = linear(doc, "lambda"))
            c.combiner.lambda = *l;

        if (doc.contains("quantized"))
        {
            if (!doc.at("quantized").is_boolean())
                parse_fail("quantized must be a boolean");
            c.quantized = doc.at("quantized").get<bool>();
        }
        if (doc.contains("seed"))
        {
            if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer())
                parse_fail("seed must be an integer");
            c.seed = doc.at("seed").get<std::uint64_t>();
        }
        if (doc.contains("csi"))
            c.csi = parse_enum(doc.at("csi"), "csi", csis);
        if (doc.contains("alphabet"))
            c.alphabet = parse_enum(doc.at("alphabet"), "alphabet", alphabets);
        if (doc.contains("pilot_phases"))
            c.pilot_phases = parse_enum(doc.at("pilot_phases"), "pilot_phases", phases);
        if (doc.contains("estimator_stats"))
            c.estimator_stats = parse_enum(doc.at("estimator_stats"), "estimator_stats", stats);
        return c;
    }

    SystemConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::Io, "cannot open " + path);
        nlohmann::json doc;
        try
        {
            in >> doc;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw Error(ErrorCode::ConfigParse, path + ": " + e.what());
        }
        return config_from_json(doc);
    }

    nlohmann::json config_to_json(const SystemConfig &c)
    {
        nlohmann::json users = nlohmann::json::array();
        for (const auto &u : c.users)
            users.push_back({{"beta", u.beta}, {"power", u.power}});
        nlohmann::json combiner = {{"kind", to_string(c.combiner.kind)}};
        if (c.combiner.lambda)
            combiner["lambda"] = *c.combiner.lambda;
        return {
            {"antennas", c.antennas},
            {"users", users},
            {"pdp", c.pdp.taps},
            {"noise_floor", c.noise_floor},
            {"pilot_len", c.pilot_len},
            {"data_len", c.data_len},
            {"waveform", to_string(c.waveform)},
            {"combiner", combiner},
            {"quantized", c.quantized},
            {"seed", c.seed},
            {"csi", to_string(c.csi)},
            {"alphabet", to_string(c.alphabet)},
            {"pilot_phases", to_string(c.pilot_phases)},
            {"estimator_stats", to_string(c.estimator_stats)},
        };
    }

    std::string config_hash(const SystemConfig &config)
    {
        std::string s = config_to_json(config).dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s)
        {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
}
