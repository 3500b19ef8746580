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

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siqrng/error.hpp"
#include "siqrng/random.hpp"

namespace siqrng {

enum class Basis { x, z };

/// How X-basis and Z-basis no-click rounds are treated in post-processing.
enum class Treatment {
    /// No-click counts as an error in X and as a correct, randomness-free event in Z.
    blinding_aware,
    /// Squashing-model treatment: no-click rounds are discarded as vacua.
    legacy_squash,
};

inline std::string_view to_string(Treatment t) {
    return t == Treatment::blinding_aware ? "blinding_aware" : "legacy_squash";
}

inline Treatment parse_treatment(std::string_view name) {
    if (name == "blinding_aware") {
        return Treatment::blinding_aware;
    }
    if (name == "legacy_squash" || name == "legacy") {
        return Treatment::legacy_squash;
    }
    throw Error(ErrorKind::invalid_argument, "unknown treatment '" + std::string(name) + "'");
}

inline constexpr int kMaxDimension = 64;

/// A bank of threshold detectors, one per outcome of a d-outcome measurement.
struct DetectorBank {
    int dimension = 2;
    std::vector<double> efficiency;  // per detector, in [0, 1]
    double dark_count = 0.0;         // per detector per gate
    std::vector<double> threshold;   // blinded-mode intensity thresholds; 0 = unblinded

    static DetectorBank uniform(int d, double eta = 1.0, double p_dark = 0.0) {
        DetectorBank bank;
        bank.dimension = d;
        bank.efficiency.assign(static_cast<std::size_t>(d), eta);
        bank.dark_count = p_dark;
        bank.threshold.assign(static_cast<std::size_t>(d), 0.0);
        return bank;
    }

    void validate() const {
        require(dimension >= 2 && dimension <= kMaxDimension, ErrorKind::invalid_argument,
                "detector dimension must be in [2, 64], got " + std::to_string(dimension));
        require(efficiency.size() == static_cast<std::size_t>(dimension), ErrorKind::invalid_argument,
                "one efficiency per detector required");
        require(threshold.size() == static_cast<std::size_t>(dimension), ErrorKind::invalid_argument,
                "one threshold per detector required");
        for (double e : efficiency) {
            require(e >= 0.0 && e <= 1.0, ErrorKind::invalid_argument, "detector efficiency outside [0, 1]");
        }
        for (double t : threshold) {
            require(t >= 0.0, ErrorKind::invalid_argument, "detector threshold must be >= 0");
        }
        require(dark_count >= 0.0 && dark_count < 1.0, ErrorKind::invalid_argument,
                "dark-count probability outside [0, 1)");
    }
};

/// Light entering the detection device in one round.
struct SignalSpec {
    enum class Mode { honest, blinded };

    Mode mode = Mode::honest;

    // Honest coherent pulse.
    double mean_photon_number = 0.0;
    double channel_transmittance = 1.0;
    int prepared_index = 0;      // X-basis eigenstate the source aims for
    double misalignment = 0.0;   // probability the X pulse lands on a wrong outcome

    // Bright classical pulse; routing[o] is the fraction sent to logical outcome o.
    double intensity = 0.0;
    std::vector<double> routing_x;
    std::vector<double> routing_z;

    static SignalSpec honest(double mu, double transmittance = 1.0, double e_d = 0.0, int prepared = 0) {
        SignalSpec s;
        s.mode = Mode::honest;
        s.mean_photon_number = mu;
        s.channel_transmittance = transmittance;
        s.misalignment = e_d;
        s.prepared_index = prepared;
        return s;
    }

    static SignalSpec blinded(double intensity, std::vector<double> routing_x, std::vector<double> routing_z) {
        SignalSpec s;
        s.mode = Mode::blinded;
        s.intensity = intensity;
        s.routing_x = std::move(routing_x);
        s.routing_z = std::move(routing_z);
        return s;
    }

    void validate(int d) const {
        if (mode == Mode::honest) {
            require(mean_photon_number >= 0.0 && std::isfinite(mean_photon_number), ErrorKind::invalid_argument,
                    "mean photon number must be finite and >= 0");
            require(channel_transmittance >= 0.0 && channel_transmittance <= 1.0, ErrorKind::invalid_argument,
                    "channel transmittance outside [0, 1]");
            require(misalignment >= 0.0 && misalignment < 1.0, ErrorKind::invalid_argument,
                    "misalignment outside [0, 1)");
            require(prepared_index >= 0 && prepared_index < d, ErrorKind::invalid_argument,
                    "prepared state index out of range");
            return;
        }
        require(intensity >= 0.0, ErrorKind::invalid_argument, "blinding intensity must be >= 0");
        for (const auto *routing : {&routing_x, &routing_z}) {
            require(routing->size() == static_cast<std::size_t>(d), ErrorKind::invalid_argument,
                    "routing needs one fraction per outcome");
            double sum = 0.0;
            for (double f : *routing) {
                require(f >= 0.0, ErrorKind::invalid_argument, "negative routing fraction");
                sum += f;
            }
            require(std::abs(sum - 1.0) <= 1e-9, ErrorKind::invalid_argument, "routing fractions must sum to 1");
        }
    }
};

/// Set of detectors that fired in one round, as a bit mask (bit i = detector i).
struct ClickPattern {
    std::uint64_t fired = 0;

    static ClickPattern of(std::initializer_list<int> detectors) {
        ClickPattern p;
        for (int i : detectors) {
            p.fired |= std::uint64_t{1} << i;
        }
        return p;
    }

    bool empty() const { return fired == 0; }
    int count() const { return std::popcount(fired); }
    bool contains(int i) const { return (fired >> i) & 1U; }

    /// Index of the only detector that fired, or -1.
    int single() const { return count() == 1 ? std::countr_zero(fired) : -1; }

    std::vector<int> indices() const {
        std::vector<int> out;
        for (std::uint64_t m = fired; m != 0; m &= m - 1) {
            out.push_back(std::countr_zero(m));
        }
        return out;
    }

    friend bool operator==(ClickPattern, ClickPattern) = default;
};

struct Category {
    enum class Kind { x_correct, x_error, x_discarded, z_single, z_no_randomness, z_discarded };

    Kind kind = Kind::x_error;
    int value = -1;  // detector index for z_single

    friend bool operator==(const Category &, const Category &) = default;
};

inline void validate_assignment(std::span<const int> assignment, int d) {
    require(assignment.size() == static_cast<std::size_t>(d), ErrorKind::invalid_argument,
            "detector assignment must have one entry per outcome");
    std::uint64_t seen = 0;
    for (int p : assignment) {
        require(p >= 0 && p < d && ((seen >> p) & 1U) == 0, ErrorKind::invalid_argument,
                "detector assignment is not a permutation");
        seen |= std::uint64_t{1} << p;
    }
}

namespace detail {

inline std::uint64_t dark_clicks(const DetectorBank &bank, RandomStream &rng) {
    std::uint64_t mask = 0;
    if (bank.dark_count > 0.0) {
        for (int i = 0; i < bank.dimension; ++i) {
            if (rng.bernoulli(bank.dark_count)) {
                mask |= std::uint64_t{1} << i;
            }
        }
    }
    return mask;
}

/// measure_pulse without input validation; callers validate once up front.
inline ClickPattern measure_unchecked(const SignalSpec &signal, const DetectorBank &bank, Basis basis,
                                      std::span<const int> assignment, RandomStream &rng) {
    const int d = bank.dimension;
    std::uint64_t fired = 0;
    if (signal.mode == SignalSpec::Mode::honest) {
        const std::uint64_t photons = rng.poisson(signal.mean_photon_number);
        if (photons > 0) {
            int x_target = signal.prepared_index;
            if (basis == Basis::x && signal.misalignment > 0.0 && rng.bernoulli(signal.misalignment)) {
                // Uniformly one of the d - 1 wrong outcomes.
                const int shift = 1 + static_cast<int>(rng.index(static_cast<std::uint32_t>(d - 1)));
                x_target = (x_target + shift) % d;
            }
            for (std::uint64_t n = 0; n < photons; ++n) {
                const int logical =
                    basis == Basis::x ? x_target : static_cast<int>(rng.index(static_cast<std::uint32_t>(d)));
                const int physical = assignment[static_cast<std::size_t>(logical)];
                if (rng.bernoulli(signal.channel_transmittance * bank.efficiency[static_cast<std::size_t>(physical)])) {
                    fired |= std::uint64_t{1} << physical;
                }
            }
        }
    } else {
        const auto &routing = basis == Basis::x ? signal.routing_x : signal.routing_z;
        for (int o = 0; o < d; ++o) {
            const int physical = assignment[static_cast<std::size_t>(o)];
            const double incident = signal.intensity * routing[static_cast<std::size_t>(o)];
            if (incident > bank.threshold[static_cast<std::size_t>(physical)]) {
                fired |= std::uint64_t{1} << physical;
            }
        }
    }
    fired |= dark_clicks(bank, rng);
    return ClickPattern{fired};
}

}  // namespace detail

/// Simulates one detection round.
///
/// `assignment[o]` is the physical detector standing for logical outcome o.
/// Honest pulses are Poissonian: in X every photon heads for the prepared
/// outcome (or a wrong one with the misalignment probability), in Z each
/// photon picks an outcome uniformly; each survives with probability
/// transmittance * detector efficiency. Blinded detectors fire iff their
/// routed intensity strictly exceeds their threshold. Dark counts are
/// independent per detector in both modes.
inline ClickPattern measure_pulse(const SignalSpec &signal, const DetectorBank &bank, Basis basis,
                                  std::span<const int> assignment, RandomStream &rng) {
    require(basis == Basis::x || basis == Basis::z, ErrorKind::invalid_argument, "unknown basis");
    bank.validate();
    signal.validate(bank.dimension);
    validate_assignment(assignment, bank.dimension);
    return detail::measure_unchecked(signal, bank, basis, assignment, rng);
}

inline Category classify_pattern(ClickPattern pattern, Basis basis, int correct_index, Treatment treatment) {
    using Kind = Category::Kind;
    require(correct_index >= 0 && correct_index < kMaxDimension, ErrorKind::invalid_argument,
            "correct detector index out of range");
    const bool legacy = treatment == Treatment::legacy_squash;
    if (basis == Basis::x) {
        if (pattern.empty()) {
            return {legacy ? Kind::x_discarded : Kind::x_error};
        }
        return {pattern.single() == correct_index ? Kind::x_correct : Kind::x_error};
    }
    if (pattern.empty()) {
        return {legacy ? Kind::z_discarded : Kind::z_no_randomness};
    }
    const int single = pattern.single();
    if (single >= 0) {
        return {Kind::z_single, single};
    }
    return {Kind::z_no_randomness};
}

}  // namespace siqrng
