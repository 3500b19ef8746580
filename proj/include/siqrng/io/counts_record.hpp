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
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "siqrng/detector.hpp"
#include "siqrng/error.hpp"
#include "siqrng/io/json_util.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"

namespace siqrng::io {

/// Largest allowed gap between a stated e_x and N_x^e / (tested X rounds);
/// the published rates carry four decimals.
inline constexpr double kErrorRateRounding = 5e-5;

/// One row of experimental (or simulated) counts, field-for-field as the
/// results tables print them.
struct CountsRecord {
    std::string label;
    Treatment variant = Treatment::blinding_aware;
    int dimension = 2;
    std::uint64_t n_z = 0;
    std::uint64_t n_x = 0;
    std::vector<std::uint64_t> total_clicks_z;
    std::vector<std::uint64_t> single_clicks_z;
    std::optional<double> e_x;
    std::optional<std::uint64_t> n_x_errors;   // N_x^e
    std::optional<std::uint64_t> n_x_tested;   // X rounds the error rate is over (legacy: clicked)
    std::optional<std::uint64_t> n_z_clicked;  // legacy Z population
    std::optional<double> phi_z_bar;
    double q = 0.954;
    std::optional<double> eta_e;
    double epsilon_sec = 1e-9;
    std::optional<double> rate_reported;
    std::optional<std::string> note;

    /// Filled during ingestion; never serialized.
    std::vector<std::string> warnings;

    std::uint64_t z_single() const {
        return std::accumulate(single_clicks_z.begin(), single_clicks_z.end(), std::uint64_t{0});
    }
    std::uint64_t z_total_clicks() const {
        return std::accumulate(total_clicks_z.begin(), total_clicks_z.end(), std::uint64_t{0});
    }

    /// X rounds the error rate refers to. Legacy records without an explicit
    /// count scale N_X by the clicked fraction of Z rounds.
    double test_rounds() const {
        if (n_x_tested) {
            return static_cast<double>(*n_x_tested);
        }
        if (variant == Treatment::legacy_squash && n_z > 0) {
            return static_cast<double>(n_x) * z_population() / static_cast<double>(n_z);
        }
        return static_cast<double>(n_x);
    }

    /// Z rounds the phase error bound is extended to.
    double z_population() const {
        if (variant == Treatment::blinding_aware) {
            return static_cast<double>(n_z);
        }
        if (n_z_clicked) {
            return static_cast<double>(*n_z_clicked);
        }
        // Two detectors: every multi-click round is a double click, counted
        // once in each detector's total.
        require(dimension == 2, ErrorKind::unsupported,
                "legacy record with d > 2 needs N_z_clicked to recover the clicked Z rounds");
        const double singles = static_cast<double>(z_single());
        return singles + (static_cast<double>(z_total_clicks()) - singles) / 2.0;
    }

    double error_rate() const {
        if (e_x) {
            return *e_x;
        }
        return static_cast<double>(*n_x_errors) / test_rounds();
    }

    /// Checks invariants; appends reconciliation warnings.
    void validate() {
        const std::string where = "counts record '" + label + "'";
        require(dimension >= 2 && dimension <= kMaxDimension, ErrorKind::invalid_argument,
                where + ": dimension must be in [2, 64]");
        require(total_clicks_z.size() == static_cast<std::size_t>(dimension), ErrorKind::invalid_argument,
                where + ": total_clicks_Z needs one entry per detector");
        require(single_clicks_z.size() == static_cast<std::size_t>(dimension), ErrorKind::invalid_argument,
                where + ": single_clicks_Z needs one entry per detector");
        for (std::size_t i = 0; i < single_clicks_z.size(); ++i) {
            require(single_clicks_z[i] <= total_clicks_z[i], ErrorKind::invalid_argument,
                    where + ": single_clicks_Z[" + std::to_string(i) + "] = " + std::to_string(single_clicks_z[i]) +
                        " exceeds total_clicks_Z[" + std::to_string(i) + "] = " + std::to_string(total_clicks_z[i]));
            require(total_clicks_z[i] <= n_z, ErrorKind::invalid_argument,
                    where + ": total_clicks_Z[" + std::to_string(i) + "] exceeds N_Z");
        }
        require(z_single() <= n_z, ErrorKind::invalid_argument, where + ": sum of single_clicks_Z exceeds N_Z");
        require(n_x > 0, ErrorKind::invalid_argument, where + ": N_X must be positive");
        require(e_x || n_x_errors, ErrorKind::schema, where + ": needs e_x or N_x_e");
        if (e_x) {
            require(*e_x >= 0.0 && *e_x <= 1.0, ErrorKind::invalid_argument, where + ": e_x outside [0, 1]");
        }
        if (n_x_tested) {
            require(*n_x_tested <= n_x, ErrorKind::invalid_argument, where + ": N_x_tested exceeds N_X");
        }
        if (n_z_clicked) {
            require(*n_z_clicked <= n_z && *n_z_clicked >= z_single(), ErrorKind::invalid_argument,
                    where + ": N_z_clicked must lie between the single-click count and N_Z");
        }
        if (n_x_errors) {
            require(static_cast<double>(*n_x_errors) <= test_rounds(), ErrorKind::invalid_argument,
                    where + ": N_x_e exceeds the tested X rounds");
            if (e_x) {
                const double implied = static_cast<double>(*n_x_errors) / test_rounds();
                if (std::abs(implied - *e_x) > kErrorRateRounding) {
                    warnings.push_back("e_x = " + std::to_string(*e_x) + " disagrees with N_x_e / tested rounds = " +
                                       std::to_string(implied) + " beyond rounding; using e_x");
                }
            }
        }
        if (phi_z_bar) {
            require(*phi_z_bar >= 0.0 && *phi_z_bar <= 1.0, ErrorKind::invalid_argument,
                    where + ": phi_z_bar outside [0, 1]");
        }
        require(q > 0.0, ErrorKind::invalid_argument, where + ": q must be positive");
        if (eta_e) {
            require(*eta_e > 0.0 && *eta_e <= 1.0, ErrorKind::invalid_argument, where + ": eta_e outside (0, 1]");
        }
        require(epsilon_sec > 0.0 && epsilon_sec < 1.0, ErrorKind::invalid_argument,
                where + ": epsilon_sec outside (0, 1)");
    }
};

inline CountsRecord record_from_json(const Json &j) {
    constexpr std::string_view where = "counts record";
    detail::check_keys(j, where,
                       {"label", "variant", "dimension", "N_Z", "N_X", "total_clicks_Z", "single_clicks_Z", "e_x",
                        "N_x_e", "N_x_tested", "N_z_clicked", "phi_z_bar", "calibration", "epsilon_sec", "R",
                        "note"});
    CountsRecord r;
    r.label = detail::get_optional<std::string>(j, where, "label").value_or("");
    r.variant = parse_treatment(detail::get_optional<std::string>(j, where, "variant").value_or("blinding_aware"));
    r.dimension = detail::get_optional<int>(j, where, "dimension").value_or(2);
    r.n_z = detail::get_count(j, where, "N_Z");
    r.n_x = detail::get_count(j, where, "N_X");
    for (const char *key : {"total_clicks_Z", "single_clicks_Z"}) {
        require(j.contains(key) && j.at(key).is_array(), ErrorKind::schema,
                std::string(where) + ": field '" + key + "' must be an array of counts");
        auto &dest = std::string_view(key) == "total_clicks_Z" ? r.total_clicks_z : r.single_clicks_z;
        for (const auto &v : j.at(key)) {
            require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), ErrorKind::schema,
                    std::string(where) + ": field '" + key + "' must hold non-negative integers");
            dest.push_back(v.get<std::uint64_t>());
        }
    }
    r.e_x = detail::get_optional<double>(j, where, "e_x");
    r.n_x_errors = detail::get_optional_count(j, where, "N_x_e");
    r.n_x_tested = detail::get_optional_count(j, where, "N_x_tested");
    r.n_z_clicked = detail::get_optional_count(j, where, "N_z_clicked");
    r.phi_z_bar = detail::get_optional<double>(j, where, "phi_z_bar");
    require(j.contains("calibration"), ErrorKind::schema, std::string(where) + ": missing field 'calibration'");
    const Json &cal = j.at("calibration");
    detail::check_keys(cal, "calibration", {"q", "eta_e"});
    r.q = detail::get_field<double>(cal, "calibration", "q");
    r.eta_e = detail::get_optional<double>(cal, "calibration", "eta_e");
    if (!r.eta_e) {
        r.warnings.emplace_back("calibration.eta_e missing; using 1.0");
    }
    r.epsilon_sec = detail::get_optional<double>(j, where, "epsilon_sec").value_or(1e-9);
    r.rate_reported = detail::get_optional<double>(j, where, "R");
    r.note = detail::get_optional<std::string>(j, where, "note");
    r.validate();
    return r;
}

/// Serializes only the fields that were present, so ingest-then-write
/// reproduces the input object.
inline Json to_json(const CountsRecord &r) {
    Json j;
    if (!r.label.empty()) {
        j["label"] = r.label;
    }
    j["variant"] = std::string(to_string(r.variant));
    j["dimension"] = r.dimension;
    j["N_Z"] = r.n_z;
    j["N_X"] = r.n_x;
    j["total_clicks_Z"] = r.total_clicks_z;
    j["single_clicks_Z"] = r.single_clicks_z;
    if (r.e_x) {
        j["e_x"] = *r.e_x;
    }
    if (r.n_x_errors) {
        j["N_x_e"] = *r.n_x_errors;
    }
    if (r.n_x_tested) {
        j["N_x_tested"] = *r.n_x_tested;
    }
    if (r.n_z_clicked) {
        j["N_z_clicked"] = *r.n_z_clicked;
    }
    if (r.phi_z_bar) {
        j["phi_z_bar"] = *r.phi_z_bar;
    }
    Json cal;
    cal["q"] = r.q;
    if (r.eta_e) {
        cal["eta_e"] = *r.eta_e;
    }
    j["calibration"] = cal;
    j["epsilon_sec"] = r.epsilon_sec;
    if (r.rate_reported) {
        j["R"] = *r.rate_reported;
    }
    if (r.note) {
        j["note"] = *r.note;
    }
    return j;
}

inline CountsRecord ingest_counts(const std::filesystem::path &path) {
    try {
        return record_from_json(read_json_file(path));
    } catch (const Error &e) {
        // Keep the category, add the file.
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(e.kind())) + ": ";
        if (msg.rfind(prefix, 0) == 0) {
            msg = msg.substr(prefix.size());
        }
        throw Error(e.kind(), path.string() + ": " + msg);
    }
}

/// Counts record for a simulated session, including the exact error and
/// population counts the tables leave out.
inline CountsRecord record_from_tally(const TallySummary &t, Treatment variant, const SecurityParams &sec,
                                      std::string label = "") {
    CountsRecord r;
    r.label = std::move(label);
    r.variant = variant;
    r.dimension = t.dimension;
    r.n_z = t.z_rounds;
    r.n_x = t.x_rounds;
    r.total_clicks_z = t.z_clicks;
    r.single_clicks_z = t.z_single_clicks;
    r.e_x = t.x_error_rate();
    r.n_x_errors = t.x_error;
    r.n_x_tested = t.x_tested();
    r.n_z_clicked = variant == Treatment::legacy_squash ? t.z_clicked() : t.z_rounds;
    r.q = sec.q;
    r.eta_e = sec.eta_e;
    r.epsilon_sec = sec.eps_sec;
    return r;
}

inline Evidence evidence_from_record(const CountsRecord &r) {
    Evidence e;
    e.dimension = r.dimension;
    e.rounds = static_cast<double>(r.n_z + r.n_x);
    e.x_rounds = static_cast<double>(r.n_x);
    e.test_rounds = r.test_rounds();
    e.x_error_rate = r.error_rate();
    e.z_population = r.z_population();
    e.z_single = static_cast<double>(r.z_single());
    return e;
}

inline SecurityParams security_from_record(const CountsRecord &r) {
    SecurityParams s;
    s.q = r.q;
    s.eta_e = r.eta_e.value_or(1.0);
    s.eps_sec = r.epsilon_sec;
    return s;
}

enum class PhaseMode {
    /// Bound the phase error from e_x and the sampling correction.
    computed,
    /// Use the record's phi_z_bar as given.
    from_record,
};

/// Length analysis for a record; `bound` and `asymptotic` come from `base`.
inline AnalysisReport analyze_record(const CountsRecord &r, PhaseMode mode = PhaseMode::computed,
                                     std::optional<SecurityParams> base = std::nullopt) {
    SecurityParams sec = security_from_record(r);
    if (base) {
        sec.bound = base->bound;
        sec.asymptotic = base->asymptotic;
    }
    std::optional<double> phase;
    if (mode == PhaseMode::from_record) {
        require(r.phi_z_bar.has_value(), ErrorKind::schema,
                "counts record '" + r.label + "' has no phi_z_bar to use as an override");
        phase = r.phi_z_bar;
    }
    return key_length(evidence_from_record(r), sec, r.variant, phase);
}

}  // namespace siqrng::io
