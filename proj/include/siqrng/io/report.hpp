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

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "siqrng/io/counts_record.hpp"
#include "siqrng/io/json_util.hpp"
#include "siqrng/rate_model.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"
#include "siqrng/stat_tests.hpp"

namespace siqrng::io {

inline Json to_json(const AnalysisReport &r) {
    Json j;
    j["treatment"] = std::string(to_string(r.treatment));
    j["sampling_bound"] = std::string(to_string(r.bound));
    j["asymptotic"] = r.asymptotic;
    j["phase_overridden"] = r.phase_overridden;
    j["e_x"] = r.e_x;
    j["gamma"] = r.gamma;
    j["e_x_bar"] = r.e_x_bar;
    j["phi_z_bar"] = r.phi_z_bar;
    j["phase_saturated"] = r.phase_saturated;
    j["entropy_hd"] = r.entropy;
    j["n_seeds"] = r.n_seeds;
    j["hashing_penalty"] = r.hashing_penalty;
    j["length_unclamped"] = r.length_unclamped;
    j["length"] = r.length;
    j["N"] = r.rounds;
    j["R"] = r.rate;
    return j;
}

/// Tallies without the raw symbol stream.
inline Json to_json(const TallySummary &t) {
    Json j;
    j["dimension"] = t.dimension;
    j["rounds"] = t.rounds;
    j["x_rounds"] = t.x_rounds;
    j["z_rounds"] = t.z_rounds;
    j["x_correct"] = t.x_correct;
    j["x_error"] = t.x_error;
    j["x_discarded"] = t.x_discarded;
    j["x_error_rate"] = t.x_error_rate();
    j["z_single"] = t.z_single;
    j["z_no_randomness"] = t.z_no_randomness;
    j["z_discarded"] = t.z_discarded;
    j["z_clicks"] = t.z_clicks;
    j["z_single_clicks"] = t.z_single_clicks;
    j["attacked_rounds"] = t.attacked_rounds;
    j["z_single_on_target"] = t.z_single_on_target;
    return j;
}

inline Json to_json(const stats::BatteryReport &b) {
    Json j;
    j["sequence_count"] = b.config.count;
    j["sequence_length"] = b.config.length;
    j["alpha"] = b.config.alpha;
    j["proportion_threshold"] = b.config.proportion_threshold();
    j["uniformity_threshold"] = stats::kUniformityThreshold;
    Json rows = Json::array();
    for (const auto &r : b.results) {
        rows.push_back({{"test", r.name},
                        {"p_value_T", r.uniformity},
                        {"proportion", r.proportion},
                        {"result", r.pass ? "Success" : "Failure"}});
    }
    for (const auto &name : b.not_implemented) {
        rows.push_back({{"test", name}, {"result", "not implemented"}});
    }
    j["tests"] = rows;
    j["all_pass"] = b.all_pass();
    return j;
}

/// Fixed-width table with the columns P-value_T, Proportion, Result.
inline std::string battery_table(const stats::BatteryReport &b) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%zu sequences x %zu bits, alpha = %g, minimum proportion %.4f\n",
                  b.config.count, b.config.length, b.config.alpha, b.config.proportion_threshold());
    out << line;
    std::snprintf(line, sizeof line, "%-28s %12s %11s %16s\n", "Statistical test", "P-value_T", "Proportion",
                  "Result");
    out << line;
    for (const auto &r : b.results) {
        std::snprintf(line, sizeof line, "%-28s %12.6f %11.4f %16s\n", r.name.c_str(), r.uniformity, r.proportion,
                      r.pass ? "Success" : "Failure");
        out << line;
    }
    for (const auto &name : b.not_implemented) {
        std::snprintf(line, sizeof line, "%-28s %12s %11s %16s\n", name.c_str(), "-", "-", "not implemented");
        out << line;
    }
    return out.str();
}

inline std::string intensity_csv(const std::vector<IntensityPoint> &points) {
    std::ostringstream out;
    out.precision(10);
    out << "mu,effective_mu,R,R_legacy,e_x,phi_z_bar\n";
    for (const auto &p : points) {
        out << p.mu << ',' << p.effective_mu << ',' << p.rate << ',' << p.rate_legacy << ',' << p.e_x << ','
            << p.phi_z_bar << '\n';
    }
    return out.str();
}

inline std::string loss_csv(const std::vector<LossPoint> &points) {
    std::ostringstream out;
    out.precision(10);
    out << "loss_db,mu_optimal,R_optimal,R_fixed,R_legacy_fixed\n";
    for (const auto &p : points) {
        out << p.loss_db << ',' << p.mu_optimal << ',' << p.rate_optimal << ',' << p.rate_fixed << ','
            << p.rate_legacy_fixed << '\n';
    }
    return out.str();
}

inline std::string dimension_csv(const std::vector<DimensionPoint> &points) {
    std::ostringstream out;
    out.precision(10);
    out << "d,N,asymptotic,mu_optimal,p_x_optimal,R_optimal\n";
    for (const auto &p : points) {
        out << p.dimension << ',' << p.rounds << ',' << (p.asymptotic ? 1 : 0) << ',' << p.optimum.mu << ','
            << p.optimum.p_x << ',' << p.optimum.rate << '\n';
    }
    return out.str();
}

}  // namespace siqrng::io
