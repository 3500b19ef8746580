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
#include <cstdint>
#include <string>
#include <vector>

#include "siqrng/bits.hpp"
#include "siqrng/error.hpp"
#include "siqrng/gf2_poly.hpp"
#include "siqrng/random.hpp"
#include "siqrng/security.hpp"

namespace siqrng {

/// Binary Toeplitz hash from m input bits to l output bits.
///
/// The matrix is fixed by a seed of m + l - 1 bits: entry (i, j) is
/// seed[j - i + l - 1]. Seed bit 0 is therefore the bottom-left entry,
/// seed bits 0..l-1 run up the first column, and seed bits l-1..m+l-2 run
/// along the first row. The output is T * raw over GF(2).
struct ToeplitzSpec {
    std::size_t input_bits = 0;
    std::size_t output_bits = 0;
    BitString seed;

    static std::size_t seed_bits_for(std::size_t m, std::size_t l) { return l == 0 ? 0 : m + l - 1; }

    void validate() const {
        require(output_bits <= input_bits, ErrorKind::invalid_argument,
                "output length " + std::to_string(output_bits) + " exceeds input length " +
                    std::to_string(input_bits));
        require(seed.size() == seed_bits_for(input_bits, output_bits), ErrorKind::invalid_argument,
                "Toeplitz seed must have m + l - 1 bits");
    }

    bool entry(std::size_t i, std::size_t j) const { return seed.get(j + output_bits - 1 - i); }
};

namespace detail {

inline std::uint64_t reverse_word(std::uint64_t x) {
    x = ((x >> 1) & 0x5555555555555555ULL) | ((x & 0x5555555555555555ULL) << 1);
    x = ((x >> 2) & 0x3333333333333333ULL) | ((x & 0x3333333333333333ULL) << 2);
    x = ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((x & 0x0F0F0F0F0F0F0F0FULL) << 4);
    return __builtin_bswap64(x);
}

/// Bit-reversed copy: out[i] = in[size - 1 - i].
inline BitString reversed(const BitString &in) {
    const std::size_t n = in.size();
    if (n == 0) {
        return {};
    }
    const auto words = in.words();
    std::vector<std::uint64_t> rev(words.size());
    for (std::size_t w = 0; w < words.size(); ++w) {
        rev[words.size() - 1 - w] = reverse_word(words[w]);
    }
    // The padding bits of the last word are now at the front.
    const std::size_t pad = words.size() * 64 - n;
    return BitString::from_words(std::move(rev), words.size() * 64).slice(pad, n);
}

/// Words holding bits [start, start + count) of `bits`, zero outside its range.
inline std::vector<std::uint64_t> window_words(const BitString &bits, std::int64_t start, std::size_t count) {
    std::vector<std::uint64_t> out((count + 63) / 64, 0);
    const std::int64_t begin = std::max<std::int64_t>(start, 0);
    const std::int64_t end = std::min<std::int64_t>(start + static_cast<std::int64_t>(count),
                                                    static_cast<std::int64_t>(bits.size()));
    if (begin >= end) {
        return out;
    }
    const BitString part = bits.slice(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin));
    const std::size_t offset = static_cast<std::size_t>(begin - start);
    const auto pw = part.words();
    const std::size_t shift = offset & 63;
    const std::size_t first = offset >> 6;
    for (std::size_t w = 0; w < pw.size(); ++w) {
        out[first + w] ^= pw[w] << shift;
        if (shift != 0 && first + w + 1 < out.size()) {
            out[first + w + 1] ^= pw[w] >> (64 - shift);
        }
    }
    return out;
}

}  // namespace detail

/// Toeplitz hash of `raw` (word-packed, block convolution via carry-less
/// multiplication). Bit-exact with the dense matrix-vector product.
inline BitString extract(const BitString &raw, const ToeplitzSpec &spec) {
    spec.validate();
    require(raw.size() == spec.input_bits, ErrorKind::invalid_argument,
            "raw length " + std::to_string(raw.size()) + " does not match spec input length " +
                std::to_string(spec.input_bits));
    const std::size_t m = spec.input_bits;
    const std::size_t l = spec.output_bits;
    if (l == 0) {
        return {};
    }

    // With x' = reverse(raw), y_i is coefficient m + l - 2 - i of seed * x'.
    // x' is processed in blocks of B bits; block b0 contributes coefficients
    // [B - 1, B + l - 1) of (seed window starting at m - b0 - B) * block.
    const BitString xr = detail::reversed(raw);
    const std::size_t block = std::min<std::size_t>(std::max<std::size_t>(l, 1 << 16), (m + 63) / 64 * 64);
    const std::size_t window = block + l - 1;
    std::vector<std::uint64_t> acc((l + 63) / 64, 0);

    for (std::size_t b0 = 0; b0 < m; b0 += block) {
        const std::size_t len = std::min(block, m - b0);
        const auto xb = detail::window_words(xr, static_cast<std::int64_t>(b0), len);
        const std::int64_t start = static_cast<std::int64_t>(m) - static_cast<std::int64_t>(b0 + block);
        const auto sw = detail::window_words(spec.seed, start, window);
        const auto prod = gf2::multiply(sw, xb);
        const BitString pbits = BitString::from_words(prod, prod.size() * 64);
        const BitString slice = pbits.slice(block - 1, l);
        const auto sw_words = slice.words();
        for (std::size_t w = 0; w < acc.size(); ++w) {
            acc[w] ^= sw_words[w];
        }
    }
    // acc bit j is y_(l - 1 - j).
    return detail::reversed(BitString::from_words(std::move(acc), l));
}

/// Spec for hashing raw_length bits down to the report's certified length,
/// with seed bits drawn from `seed_stream`.
inline ToeplitzSpec plan_extraction(const AnalysisReport &report, std::size_t raw_length, RandomStream &seed_stream) {
    require(report.length <= raw_length, ErrorKind::inconsistent_analysis,
            "certified length " + std::to_string(report.length) + " exceeds raw length " +
                std::to_string(raw_length));
    ToeplitzSpec spec;
    spec.input_bits = raw_length;
    spec.output_bits = static_cast<std::size_t>(report.length);
    const std::size_t seed_bits = ToeplitzSpec::seed_bits_for(spec.input_bits, spec.output_bits);
    std::vector<std::uint64_t> words((seed_bits + 63) / 64);
    for (auto &w : words) {
        w = seed_stream.next_u64();
    }
    spec.seed = BitString::from_words(std::move(words), seed_bits);
    return spec;
}

/// Spec using caller-supplied seed bits (the first m + l - 1 are used).
inline ToeplitzSpec plan_extraction(const AnalysisReport &report, std::size_t raw_length, const BitString &seed_bits) {
    require(report.length <= raw_length, ErrorKind::inconsistent_analysis,
            "certified length " + std::to_string(report.length) + " exceeds raw length " +
                std::to_string(raw_length));
    ToeplitzSpec spec;
    spec.input_bits = raw_length;
    spec.output_bits = static_cast<std::size_t>(report.length);
    const std::size_t needed = ToeplitzSpec::seed_bits_for(spec.input_bits, spec.output_bits);
    require(seed_bits.size() >= needed, ErrorKind::invalid_argument,
            "seed has " + std::to_string(seed_bits.size()) + " bits, " + std::to_string(needed) + " needed");
    spec.seed = seed_bits.slice(0, needed);
    return spec;
}

}  // namespace siqrng
