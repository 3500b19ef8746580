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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "siqrng/detector.hpp"
#include "siqrng/error.hpp"
#include "siqrng/random.hpp"

namespace siqrng {

enum class AttackStrategy {
    /// All detectors share one threshold; X-basis rounds end with no click.
    balanced,
    /// d = 2, the detector Eve takes for the correct X outcome has the lower
    /// threshold; X-basis rounds fire only that detector.
    unbalanced,
    /// Generalization of `unbalanced` to d outcomes.
    d_dimensional,
};

inline std::string_view to_string(AttackStrategy s) {
    switch (s) {
        case AttackStrategy::balanced:
            return "balanced";
        case AttackStrategy::unbalanced:
            return "unbalanced";
        case AttackStrategy::d_dimensional:
            return "d_dimensional";
    }
    return "unknown";
}

inline AttackStrategy parse_attack_strategy(std::string_view name) {
    if (name == "balanced") {
        return AttackStrategy::balanced;
    }
    if (name == "unbalanced") {
        return AttackStrategy::unbalanced;
    }
    if (name == "d_dimensional") {
        return AttackStrategy::d_dimensional;
    }
    throw Error(ErrorKind::invalid_argument, "unknown attack strategy '" + std::string(name) + "'");
}

struct AttackConfig {
    AttackStrategy strategy = AttackStrategy::balanced;
    /// One blinding threshold per physical detector. For d_dimensional, NaN
    /// entries are filled in by resolved_thresholds().
    std::vector<double> thresholds;
    /// Intended Z outcomes, cycled by round index. Empty: pseudorandom from eve_seed.
    std::vector<int> target_sequence;
    double attack_fraction = 1.0;
    int guessed_plus_index = 0;
    /// Pulse intensity; the midpoint of the feasible window when unset.
    std::optional<double> intensity;
    std::uint64_t eve_seed = 0x5eed0fe7eULL;
};

/// Half-open interval (lo, hi] of admissible attack intensities.
struct IntensityWindow {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double intensity) const { return lo < intensity && intensity <= hi; }
    double midpoint() const { return 0.5 * (lo + hi); }
};

/// Fraction of d * I_second used for unspecified d_dimensional thresholds.
inline constexpr double kUnspecifiedThresholdScale = 1.0 - 1e-6;

inline std::vector<double> resolved_thresholds(const AttackConfig &config) {
    std::vector<double> t = config.thresholds;
    if (config.strategy != AttackStrategy::d_dimensional) {
        return t;
    }
    std::vector<double> given;
    for (double v : t) {
        if (!std::isnan(v)) {
            given.push_back(v);
        }
    }
    if (given.size() == t.size()) {
        return t;
    }
    require(given.size() >= 2, ErrorKind::invalid_argument,
            "d_dimensional attack needs at least the two smallest thresholds");
    std::sort(given.begin(), given.end());
    const double fill = kUnspecifiedThresholdScale * static_cast<double>(t.size()) * given[1];
    for (double &v : t) {
        if (std::isnan(v)) {
            v = fill;
        }
    }
    return t;
}

inline void validate_attack(const AttackConfig &config, int d) {
    require(config.thresholds.size() == static_cast<std::size_t>(d), ErrorKind::invalid_argument,
            "attack needs one threshold per detector");
    require(config.attack_fraction >= 0.0 && config.attack_fraction <= 1.0, ErrorKind::invalid_argument,
            "attack fraction outside [0, 1]");
    require(config.guessed_plus_index >= 0 && config.guessed_plus_index < d, ErrorKind::invalid_argument,
            "guessed_plus_index out of range");
    for (int target : config.target_sequence) {
        require(target >= 0 && target < d, ErrorKind::invalid_argument, "attack target outside [0, d)");
    }
    for (double t : resolved_thresholds(config)) {
        require(t >= 0.0, ErrorKind::invalid_argument, "attack thresholds must be >= 0");
    }
}

/// Intensities for which the strategy controls Z outcomes and produces the
/// intended X-basis behaviour. Throws infeasible_attack on an empty window or
/// when the thresholds break the strategy's premise.
inline IntensityWindow feasible_intensity_window(const AttackConfig &config, int d) {
    validate_attack(config, d);
    const std::vector<double> t = resolved_thresholds(config);
    const auto g = static_cast<std::size_t>(config.guessed_plus_index);
    const double dd = static_cast<double>(d);
    IntensityWindow w;

    switch (config.strategy) {
        case AttackStrategy::balanced: {
            for (double v : t) {
                require(v == t[0], ErrorKind::infeasible_attack, "balanced attack requires equal thresholds");
            }
            w = {t[0], dd * t[0]};
            break;
        }
        case AttackStrategy::unbalanced:
        case AttackStrategy::d_dimensional: {
            require(config.strategy == AttackStrategy::d_dimensional || d == 2, ErrorKind::infeasible_attack,
                    "unbalanced attack is defined for d = 2; use d_dimensional");
            double second = std::numeric_limits<double>::infinity();
            double largest_other = 0.0;
            int ties = 0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (i == g) {
                    continue;
                }
                require(t[g] < t[i], ErrorKind::infeasible_attack,
                        "guessed-plus detector must have the strictly smallest threshold");
                if (t[i] < second) {
                    second = t[i];
                    ties = 1;
                } else if (t[i] == second) {
                    ++ties;
                }
                largest_other = std::max(largest_other, t[i]);
            }
            require(ties == 1, ErrorKind::infeasible_attack, "several detectors tie at the second-smallest threshold");
            w = {std::max(dd * t[g], largest_other), dd * second};
            break;
        }
    }
    require(w.lo < w.hi, ErrorKind::infeasible_attack,
            "empty intensity window (" + std::to_string(w.lo) + ", " + std::to_string(w.hi) + "]");
    return w;
}

/// Bright pulse steering Z towards `target`: all intensity to that outcome in
/// Z, an even 1/d split across outcomes in X.
inline SignalSpec craft_attack_pulse(const AttackConfig &config, int target, double intensity) {
    const int d = static_cast<int>(config.thresholds.size());
    const IntensityWindow window = feasible_intensity_window(config, d);
    require(target >= 0 && target < d, ErrorKind::invalid_argument, "attack target outside [0, d)");
    require(window.contains(intensity), ErrorKind::infeasible_attack,
            "intensity " + std::to_string(intensity) + " outside feasible window (" + std::to_string(window.lo) +
                ", " + std::to_string(window.hi) + "]");
    std::vector<double> routing_z(static_cast<std::size_t>(d), 0.0);
    routing_z[static_cast<std::size_t>(target)] = 1.0;
    return SignalSpec::blinded(intensity, std::vector<double>(static_cast<std::size_t>(d), 1.0 / d),
                               std::move(routing_z));
}

inline double attack_intensity(const AttackConfig &config, int d) {
    const IntensityWindow window = feasible_intensity_window(config, d);
    const double intensity = config.intensity.value_or(window.midpoint());
    require(window.contains(intensity), ErrorKind::infeasible_attack, "configured intensity outside feasible window");
    return intensity;
}

/// Eve's intended Z outcome for a round; a pure function of (config, round).
inline int eve_target(const AttackConfig &config, std::uint64_t round, int d) {
    if (!config.target_sequence.empty()) {
        return config.target_sequence[round % config.target_sequence.size()];
    }
    return static_cast<int>(splitmix64(config.eve_seed ^ splitmix64(round)) % static_cast<std::uint64_t>(d));
}

inline bool is_attacked(const AttackConfig &config, std::uint64_t round) {
    if (config.attack_fraction >= 1.0) {
        return true;
    }
    if (config.attack_fraction <= 0.0) {
        return false;
    }
    const std::uint64_t h = splitmix64(splitmix64(config.eve_seed + 0x4154544143ULL) ^ round);
    return unit_interval(h) < config.attack_fraction;
}

/// Bank with the attack's thresholds; efficiencies and dark counts unchanged.
inline DetectorBank blinded_bank(const DetectorBank &bank, const AttackConfig &config) {
    DetectorBank out = bank;
    out.threshold = resolved_thresholds(config);
    return out;
}

}  // namespace siqrng
