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

#include <cstdint>
#include <random>

namespace siqrng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Maps a 64-bit hash to a double in [0, 1).
inline double unit_interval(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Deterministic random stream. Every stochastic operation in the library
/// takes one of these explicitly; nothing reads global state.
class RandomStream {
   public:
    explicit RandomStream(std::uint64_t seed) { reseed(seed, 0, 0); }

    /// Independent stream for (seed, index), e.g. one per session chunk.
    static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(seed, index);
    }

    std::uint64_t next_u64() { return engine_(); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    bool bernoulli(double p) {
        if (p <= 0.0) {
            return false;
        }
        if (p >= 1.0) {
            return true;
        }
        return uniform() < p;
    }

    /// Uniform integer in [0, n).
    std::uint32_t index(std::uint32_t n) {
        return std::uniform_int_distribution<std::uint32_t>(0, n - 1)(engine_);
    }

    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) {
            return 0;
        }
        return std::poisson_distribution<std::uint64_t>(mean)(engine_);
    }

    std::mt19937_64 &engine() { return engine_; }

   private:
    RandomStream(std::uint64_t seed, std::uint64_t index) { reseed(seed, index, 1); }

    void reseed(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag};
        engine_.seed(seq);
    }

    std::mt19937_64 engine_;
};

}  // namespace siqrng
