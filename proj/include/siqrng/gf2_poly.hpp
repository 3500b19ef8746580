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

// Carry-less (GF(2)[x]) multiplication of word-packed polynomials. Word w
// bit b holds the coefficient of x^(64 w + b).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#if defined(__PCLMUL__)
#include <wmmintrin.h>
#endif

namespace siqrng::gf2 {

struct Word128 {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
};

/// Portable 64x64 -> 128 carry-less product using 4-bit windows; table
/// entries are 67-bit products kept as (lo, hi).
inline Word128 clmul64_portable(std::uint64_t a, std::uint64_t b) {
    Word128 table[16];
    for (std::uint64_t k = 1; k < 16; ++k) {
        for (int bit = 0; bit < 4; ++bit) {
            if ((k >> bit) & 1U) {
                table[k].lo ^= a << bit;
                table[k].hi ^= bit == 0 ? 0 : a >> (64 - bit);
            }
        }
    }
    Word128 r;
    for (int shift = 0; shift < 64; shift += 4) {
        const Word128 &t = table[(b >> shift) & 15];
        r.lo ^= t.lo << shift;
        r.hi ^= shift == 0 ? t.hi : (t.hi << shift) | (t.lo >> (64 - shift));
    }
    return r;
}

inline constexpr bool kHardwareClmul =
#if defined(__PCLMUL__)
    true;
#else
    false;
#endif

inline Word128 clmul64(std::uint64_t a, std::uint64_t b) {
#if defined(__PCLMUL__)
    const __m128i r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(static_cast<long long>(a)),
                                           _mm_cvtsi64_si128(static_cast<long long>(b)), 0x00);
    return {static_cast<std::uint64_t>(_mm_cvtsi128_si64(r)),
            static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)))};
#else
    return clmul64_portable(a, b);
#endif
}

namespace detail {

inline constexpr std::size_t kSchoolbookWords = 16;

/// r[0, 2n) = a[0, n) * b[0, n).
inline void mul_schoolbook(const std::uint64_t *a, const std::uint64_t *b, std::size_t n, std::uint64_t *r) {
    std::fill(r, r + 2 * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const Word128 p = clmul64(a[i], b[j]);
            r[i + j] ^= p.lo;
            r[i + j + 1] ^= p.hi;
        }
    }
}

inline std::size_t karatsuba_scratch_words(std::size_t n) {
    std::size_t total = 0;
    while (n > kSchoolbookWords) {
        const std::size_t h = (n + 1) / 2;
        total += 4 * h;
        n = h;
    }
    return total + 8;
}

/// r[0, 2n) = a[0, n) * b[0, n), using `scratch` of karatsuba_scratch_words(n).
inline void mul_karatsuba(const std::uint64_t *a, const std::uint64_t *b, std::size_t n, std::uint64_t *r,
                          std::uint64_t *scratch) {
    if (n <= kSchoolbookWords) {
        mul_schoolbook(a, b, n, r);
        return;
    }
    const std::size_t h = (n + 1) / 2;
    const std::size_t l = n - h;

    // r = P0 + (P0 + P1 + P2) x^h + P2 x^2h with P0 = a0 b0, P2 = a1 b1,
    // P1 = (a0 + a1)(b0 + b1).
    mul_karatsuba(a, b, h, r, scratch);
    mul_karatsuba(a + h, b + h, l, r + 2 * h, scratch);

    std::uint64_t *sa = scratch;
    std::uint64_t *sb = scratch + h;
    std::uint64_t *mid = scratch + 2 * h;
    for (std::size_t i = 0; i < h; ++i) {
        sa[i] = a[i] ^ (i < l ? a[h + i] : 0);
        sb[i] = b[i] ^ (i < l ? b[h + i] : 0);
    }
    mul_karatsuba(sa, sb, h, mid, scratch + 4 * h);
    for (std::size_t i = 0; i < 2 * h; ++i) {
        mid[i] ^= r[i];
    }
    for (std::size_t i = 0; i < 2 * l; ++i) {
        mid[i] ^= r[2 * h + i];
    }
    for (std::size_t i = 0; i < 2 * h; ++i) {
        r[h + i] ^= mid[i];
    }
}

}  // namespace detail

/// Product of two word-packed polynomials; a.size() + b.size() words.
inline std::vector<std::uint64_t> multiply(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::uint64_t> out(a.size() + b.size(), 0);
    const std::size_t n = b.size();
    if (n == 0) {
        return out;
    }
    std::vector<std::uint64_t> chunk(n);
    std::vector<std::uint64_t> prod(2 * n);
    std::vector<std::uint64_t> scratch(detail::karatsuba_scratch_words(n));
    for (std::size_t off = 0; off < a.size(); off += n) {
        const std::size_t len = std::min(n, a.size() - off);
        std::copy(a.begin() + static_cast<std::ptrdiff_t>(off), a.begin() + static_cast<std::ptrdiff_t>(off + len),
                  chunk.begin());
        std::fill(chunk.begin() + static_cast<std::ptrdiff_t>(len), chunk.end(), 0);
        detail::mul_karatsuba(chunk.data(), b.data(), n, prod.data(), scratch.data());
        const std::size_t limit = std::min(prod.size(), out.size() - off);
        for (std::size_t i = 0; i < limit; ++i) {
            out[off + i] ^= prod[i];
        }
    }
    return out;
}

}  // namespace siqrng::gf2
