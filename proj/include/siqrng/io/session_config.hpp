// Copyright 2026 The siqrng Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "siqrng/adversary.hpp"
#include "siqrng/detector.hpp"
#include "siqrng/io/json_util.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"

namespace siqrng::io {

/// Everything a simulated session needs except the seed, which always comes
/// from the command line.
struct SessionConfig {
    ProtocolParams protocol;
    SessionSource source;
    DetectorBank bank;
    SecurityParams security;
};

inline AttackConfig attack_from_json(const Json &j) {
    constexpr std::string_view where = "attack";
    detail::check_keys(j, where,
                       {"strategy", "thresholds", "target_sequence", "fraction", "guessed_plus_index", "intensity",
                        "eve_seed"});
    AttackConfig a;
    a.strategy = parse_attack_strategy(detail::get_field<std::string>(j, where, "strategy"));
    require(j.contains("thresholds") && j.at("thresholds").is_array(), ErrorKind::schema,
            "attack: 'thresholds' must be an array");
    for (const auto &t : j.at("thresholds")) {
        if (t.is_null()) {
            a.thresholds.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            require(t.is_number(), ErrorKind::schema, "attack: thresholds must be numbers or null");
            a.thresholds.push_back(t.get<double>());
        }
    }
    a.target_sequence = detail::get_optional<std::vector<int>>(j, where, "target_sequence").value_or(std::vector<int>{});
    a.attack_fraction = detail::get_optional<double>(j, where, "fraction").value_or(1.0);
    a.guessed_plus_index = detail::get_optional<int>(j, where, "guessed_plus_index").value_or(0);
    a.intensity = detail::get_optional<double>(j, where, "intensity");
    if (auto seed = detail::get_optional_count(j, where, "eve_seed")) {
        a.eve_seed = *seed;
    }
    return a;
}

inline Json to_json(const AttackConfig &a) {
    Json j;
    j["strategy"] = std::string(to_string(a.strategy));
    Json thresholds = Json::array();
    for (double t : a.thresholds) {
        thresholds.push_back(std::isnan(t) ? Json(nullptr) : Json(t));
    }
    j["thresholds"] = thresholds;
    if (!a.target_sequence.empty()) {
        j["target_sequence"] = a.target_sequence;
    }
    j["fraction"] = a.attack_fraction;
    j["guessed_plus_index"] = a.guessed_plus_index;
    if (a.intensity) {
        j["intensity"] = *a.intensity;
    }
    j["eve_seed"] = a.eve_seed;
    return j;
}

inline SessionConfig session_config_from_json(const Json &j) {
    constexpr std::string_view where = "session config";
    detail::check_keys(j, where,
                       {"N", "d", "p_x", "treatment", "randomize_assignment", "mu", "eta", "detector_efficiency",
                        "p_d", "e_d", "prepared_index", "q", "eta_e", "epsilon_sec", "bound", "chunk_rounds",
                        "threads", "attack"});
    SessionConfig c;
    c.protocol.rounds = detail::get_count(j, where, "N");
    c.protocol.dimension = detail::get_optional<int>(j, where, "d").value_or(2);
    const int d = c.protocol.dimension;
    c.protocol.p_x = detail::get_optional<double>(j, where, "p_x").value_or(0.5);
    c.protocol.treatment =
        parse_treatment(detail::get_optional<std::string>(j, where, "treatment").value_or("blinding_aware"));
    c.protocol.randomize_assignment = detail::get_optional<bool>(j, where, "randomize_assignment");
    if (auto chunk = detail::get_optional_count(j, where, "chunk_rounds")) {
        c.protocol.chunk_rounds = *chunk;
    }
    c.protocol.threads = detail::get_optional<unsigned>(j, where, "threads").value_or(0);

    c.source.honest = SignalSpec::honest(detail::get_field<double>(j, where, "mu"),
                                         detail::get_optional<double>(j, where, "eta").value_or(1.0),
                                         detail::get_optional<double>(j, where, "e_d").value_or(0.0),
                                         detail::get_optional<int>(j, where, "prepared_index").value_or(0));

    c.bank = DetectorBank::uniform(d, 1.0, detail::get_optional<double>(j, where, "p_d").value_or(0.0));
    if (j.contains("detector_efficiency")) {
        const Json &eff = j.at("detector_efficiency");
        if (eff.is_array()) {
            c.bank.efficiency = eff.get<std::vector<double>>();
        } else {
            require(eff.is_number(), ErrorKind::schema, "session config: detector_efficiency must be a number or array");
            c.bank.efficiency.assign(static_cast<std::size_t>(d), eff.get<double>());
        }
    }

    c.security = SecurityParams::ideal(d);
    if (auto q = detail::get_optional<double>(j, where, "q")) {
        c.security.q = *q;
    }
    c.security.eta_e = detail::get_optional<double>(j, where, "eta_e").value_or(1.0);
    c.security.eps_sec = detail::get_optional<double>(j, where, "epsilon_sec").value_or(1e-9);
    if (auto bound = detail::get_optional<std::string>(j, where, "bound")) {
        c.security.bound = parse_sampling_bound(*bound);
    }

    if (j.contains("attack") && !j.at("attack").is_null()) {
        c.source.attack = attack_from_json(j.at("attack"));
        validate_attack(*c.source.attack, d);
    }

    c.protocol.validate();
    c.bank.validate();
    c.source.honest.validate(d);
    c.security.validate(d);
    return c;
}

inline SessionConfig load_session_config(const std::filesystem::path &path) {
    return session_config_from_json(read_json_file(path));
}

}  // namespace siqrng::io
