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
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "siqrng/adversary.hpp"
#include "siqrng/bits.hpp"
#include "siqrng/detector.hpp"
#include "siqrng/error.hpp"
#include "siqrng/random.hpp"

namespace siqrng {

struct ProtocolParams {
    std::uint64_t rounds = 1;
    int dimension = 2;
    double p_x = 0.5;
    Treatment treatment = Treatment::blinding_aware;
    std::uint64_t seed = 0;
    /// Randomly choose the detector standing for the correct X outcome each X
    /// round. Defaults to on for blinding_aware and off for legacy_squash.
    std::optional<bool> randomize_assignment;
    /// Rounds per independently seeded chunk. Results depend on this value,
    /// never on the thread count.
    std::uint64_t chunk_rounds = std::uint64_t{1} << 18;
    unsigned threads = 0;  // 0: hardware concurrency

    bool assignment_randomized() const {
        return randomize_assignment.value_or(treatment == Treatment::blinding_aware);
    }

    void validate() const {
        require(rounds >= 1, ErrorKind::invalid_argument, "rounds must be >= 1");
        require(dimension >= 2 && dimension <= kMaxDimension, ErrorKind::invalid_argument,
                "dimension must be in [2, 64]");
        require(p_x > 0.0 && p_x < 1.0, ErrorKind::invalid_argument, "p_x must lie in (0, 1)");
        require(chunk_rounds >= 1, ErrorKind::invalid_argument, "chunk_rounds must be >= 1");
    }
};

/// Honest pulse plus an optional blinding attack on some or all rounds.
struct SessionSource {
    SignalSpec honest;
    std::optional<AttackConfig> attack;
};

struct TallySummary {
    int dimension = 2;
    std::uint64_t rounds = 0;
    std::uint64_t x_rounds = 0;
    std::uint64_t z_rounds = 0;
    std::uint64_t x_correct = 0;
    std::uint64_t x_error = 0;
    std::uint64_t x_discarded = 0;
    std::uint64_t z_single = 0;
    std::uint64_t z_no_randomness = 0;  // multi-click, plus no-click when blinding_aware
    std::uint64_t z_discarded = 0;
    std::vector<std::uint64_t> z_clicks;         // per detector, every Z round it fired in
    std::vector<std::uint64_t> z_single_clicks;  // per detector, Z rounds it fired alone
    std::vector<std::uint8_t> raw_symbols;       // Z single-click outcomes in round order
    std::uint64_t attacked_rounds = 0;
    std::uint64_t z_single_on_target = 0;  // attacked Z singles equal to Eve's target

    static TallySummary empty(int d) {
        TallySummary t;
        t.dimension = d;
        t.z_clicks.assign(static_cast<std::size_t>(d), 0);
        t.z_single_clicks.assign(static_cast<std::size_t>(d), 0);
        return t;
    }

    /// Clicked X rounds (all X rounds when nothing is discarded).
    std::uint64_t x_tested() const { return x_correct + x_error; }
    /// Clicked Z rounds.
    std::uint64_t z_clicked() const { return z_rounds - z_discarded; }

    double x_error_rate() const {
        return x_tested() == 0 ? 0.0 : static_cast<double>(x_error) / static_cast<double>(x_tested());
    }

    /// Adds `other`; counts commute, symbols append after this tally's.
    void merge(const TallySummary &other) {
        require(other.dimension == dimension, ErrorKind::invalid_argument, "cannot merge tallies of different d");
        rounds += other.rounds;
        x_rounds += other.x_rounds;
        z_rounds += other.z_rounds;
        x_correct += other.x_correct;
        x_error += other.x_error;
        x_discarded += other.x_discarded;
        z_single += other.z_single;
        z_no_randomness += other.z_no_randomness;
        z_discarded += other.z_discarded;
        for (std::size_t i = 0; i < z_clicks.size(); ++i) {
            z_clicks[i] += other.z_clicks[i];
            z_single_clicks[i] += other.z_single_clicks[i];
        }
        raw_symbols.insert(raw_symbols.end(), other.raw_symbols.begin(), other.raw_symbols.end());
        attacked_rounds += other.attacked_rounds;
        z_single_on_target += other.z_single_on_target;
    }

    void record(const Category &category) {
        switch (category.kind) {
            case Category::Kind::x_correct:
                ++x_correct;
                break;
            case Category::Kind::x_error:
                ++x_error;
                break;
            case Category::Kind::x_discarded:
                ++x_discarded;
                break;
            case Category::Kind::z_single:
                ++z_single;
                ++z_single_clicks[static_cast<std::size_t>(category.value)];
                raw_symbols.push_back(static_cast<std::uint8_t>(category.value));
                break;
            case Category::Kind::z_no_randomness:
                ++z_no_randomness;
                break;
            case Category::Kind::z_discarded:
                ++z_discarded;
                break;
        }
    }

    friend bool operator==(const TallySummary &, const TallySummary &) = default;
};

namespace detail {

inline TallySummary run_chunk(const ProtocolParams &params, const SessionSource &source, const DetectorBank &bank,
                              const std::optional<DetectorBank> &attacked_bank, double intensity,
                              std::uint64_t chunk, std::uint64_t first_round, std::uint64_t count) {
    const int d = params.dimension;
    TallySummary tally = TallySummary::empty(d);
    RandomStream rng = RandomStream::substream(params.seed, chunk);
    const bool randomize = params.assignment_randomized();

    std::vector<int> identity(static_cast<std::size_t>(d));
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<int> rotated(identity);

    // Attack pulses for each possible target, built once.
    std::vector<SignalSpec> attack_pulses;
    if (source.attack) {
        for (int target = 0; target < d; ++target) {
            attack_pulses.push_back(craft_attack_pulse(*source.attack, target, intensity));
        }
    }

    for (std::uint64_t r = first_round; r < first_round + count; ++r) {
        const Basis basis = rng.bernoulli(params.p_x) ? Basis::x : Basis::z;
        int correct = 0;
        std::span<const int> assignment = identity;
        if (basis == Basis::x && randomize) {
            // Cyclic shift: logical outcome o -> physical (o + correct) mod d.
            correct = static_cast<int>(rng.index(static_cast<std::uint32_t>(d)));
            for (int o = 0; o < d; ++o) {
                rotated[static_cast<std::size_t>(o)] = (o + correct) % d;
            }
            assignment = rotated;
        }

        const bool attacked = source.attack && is_attacked(*source.attack, r);
        int target = -1;
        ClickPattern pattern;
        if (attacked) {
            target = eve_target(*source.attack, r, d);
            pattern = measure_unchecked(attack_pulses[static_cast<std::size_t>(target)], *attacked_bank, basis,
                                        assignment, rng);
            ++tally.attacked_rounds;
        } else {
            pattern = measure_unchecked(source.honest, bank, basis, assignment, rng);
        }

        if (basis == Basis::x) {
            ++tally.x_rounds;
            // The honest source aims at logical prepared_index.
            const int correct_physical = assignment[static_cast<std::size_t>(source.honest.prepared_index)];
            tally.record(classify_pattern(pattern, basis, correct_physical, params.treatment));
        } else {
            ++tally.z_rounds;
            for (std::uint64_t m = pattern.fired; m != 0; m &= m - 1) {
                ++tally.z_clicks[static_cast<std::size_t>(std::countr_zero(m))];
            }
            const Category category = classify_pattern(pattern, basis, 0, params.treatment);
            tally.record(category);
            if (attacked && category.kind == Category::Kind::z_single && category.value == target) {
                ++tally.z_single_on_target;
            }
        }
    }
    tally.rounds = count;
    return tally;
}

}  // namespace detail

/// Runs params.rounds protocol rounds and tallies the outcomes.
///
/// Rounds are split into chunks of params.chunk_rounds; chunk c draws from
/// RandomStream::substream(seed, c). Chunks may run on several threads and
/// are merged in chunk order, so the result is a pure function of the inputs.
inline TallySummary run_session(const ProtocolParams &params, const SessionSource &source, const DetectorBank &bank) {
    params.validate();
    bank.validate();
    require(bank.dimension == params.dimension, ErrorKind::invalid_argument,
            "detector bank dimension differs from protocol dimension");
    source.honest.validate(params.dimension);
    require(source.honest.mode == SignalSpec::Mode::honest, ErrorKind::invalid_argument,
            "session honest signal must be in honest mode");

    std::optional<DetectorBank> attacked_bank;
    double intensity = 0.0;
    if (source.attack) {
        intensity = attack_intensity(*source.attack, params.dimension);
        attacked_bank = blinded_bank(bank, *source.attack);
        attacked_bank->validate();
    }

    const std::uint64_t chunks = (params.rounds + params.chunk_rounds - 1) / params.chunk_rounds;
    std::vector<TallySummary> parts(chunks);
    auto work = [&](std::uint64_t c) {
        const std::uint64_t first = c * params.chunk_rounds;
        const std::uint64_t count = std::min(params.chunk_rounds, params.rounds - first);
        parts[c] = detail::run_chunk(params, source, bank, attacked_bank, intensity, c, first, count);
    };

    unsigned threads = params.threads != 0 ? params.threads : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
    if (threads <= 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) {
            work(c);
        }
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::uint64_t c = t; c < chunks; c += threads) {
                    work(c);
                }
            });
        }
    }

    TallySummary total = TallySummary::empty(params.dimension);
    for (const auto &part : parts) {
        total.merge(part);
    }
    return total;
}

/// Random bits spent on basis choice (and, for blinding_aware, on the X
/// detector assignment): ceil(N_x * (log2 N + log2 d)), or ceil(N_x * log2 N)
/// for legacy_squash.
inline std::uint64_t seed_cost(double rounds, double x_rounds, int d, Treatment treatment) {
    require(x_rounds <= rounds, ErrorKind::invalid_argument, "N_x exceeds N");
    if (x_rounds <= 0.0) {
        return 0;
    }
    double per_round = std::log2(rounds);
    if (treatment == Treatment::blinding_aware) {
        per_round += std::log2(static_cast<double>(d));
    }
    return static_cast<std::uint64_t>(std::ceil(x_rounds * per_round));
}

/// Serializes symbols with log2(d) bits each, most significant bit first.
inline BitString raw_bits(std::span<const std::uint8_t> symbols, int d) {
    require(d >= 2 && std::has_single_bit(static_cast<unsigned>(d)), ErrorKind::unsupported,
            "raw bit serialization needs d to be a power of two, got " + std::to_string(d));
    const int width = std::countr_zero(static_cast<unsigned>(d));
    BitString out(symbols.size() * static_cast<std::size_t>(width));
    std::size_t pos = 0;
    for (std::uint8_t s : symbols) {
        require(s < d, ErrorKind::invalid_argument, "symbol outside [0, d)");
        for (int b = width - 1; b >= 0; --b) {
            out.set(pos++, (s >> b) & 1U);
        }
    }
    return out;
}

inline BitString raw_bits(const TallySummary &tally, int d) { return raw_bits(tally.raw_symbols, d); }

}  // namespace siqrng
