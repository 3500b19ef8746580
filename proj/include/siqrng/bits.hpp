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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "siqrng/error.hpp"

namespace siqrng {

/// Packed bit string. Bit i lives in word i / 64 at position i % 64 (LSB
/// first); bits past size() in the last word are always zero.
///
/// On disk the same order is used byte-wise: bit i is bit (i % 8) of byte
/// i / 8, so a file of B bytes holds 8 * B bits.
class BitString {
   public:
    BitString() = default;
    explicit BitString(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    /// Parses a string of '0'/'1' characters; character i becomes bit i.
    static BitString from_string(std::string_view text) {
        BitString out(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            require(text[i] == '0' || text[i] == '1', ErrorKind::invalid_argument,
                    "bit string may only contain '0' and '1'");
            out.set(i, text[i] == '1');
        }
        return out;
    }

    static BitString from_words(std::vector<std::uint64_t> words, std::size_t size) {
        require(words.size() * 64 >= size, ErrorKind::invalid_argument, "word buffer shorter than bit count");
        BitString out;
        out.size_ = size;
        out.words_ = std::move(words);
        out.words_.resize((size + 63) / 64);
        out.clear_tail();
        return out;
    }

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }

    void set(std::size_t i, bool value) {
        const std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    void push_back(bool value) {
        if ((size_ & 63) == 0) {
            words_.push_back(0);
        }
        ++size_;
        set(size_ - 1, value);
    }

    /// Bits [begin, begin + count) as a new string.
    BitString slice(std::size_t begin, std::size_t count) const {
        require(begin + count <= size_, ErrorKind::invalid_argument, "slice out of range");
        BitString out(count);
        const std::size_t shift = begin & 63;
        const std::size_t first = begin >> 6;
        for (std::size_t w = 0; w < out.words_.size(); ++w) {
            std::uint64_t lo = first + w < words_.size() ? words_[first + w] : 0;
            std::uint64_t hi = first + w + 1 < words_.size() ? words_[first + w + 1] : 0;
            out.words_[w] = shift == 0 ? lo : (lo >> shift) | (hi << (64 - shift));
        }
        out.clear_tail();
        return out;
    }

    void append(const BitString &other) {
        for (std::size_t i = 0; i < other.size_; ++i) {
            push_back(other.get(i));
        }
    }

    std::size_t popcount() const {
        std::size_t total = 0;
        for (std::uint64_t w : words_) {
            total += static_cast<std::size_t>(std::popcount(w));
        }
        return total;
    }

    BitString &operator^=(const BitString &other) {
        require(other.size_ == size_, ErrorKind::invalid_argument, "xor of bit strings with different lengths");
        for (std::size_t w = 0; w < words_.size(); ++w) {
            words_[w] ^= other.words_[w];
        }
        return *this;
    }

    friend BitString operator^(BitString a, const BitString &b) {
        a ^= b;
        return a;
    }

    friend bool operator==(const BitString &a, const BitString &b) {
        return a.size_ == b.size_ && a.words_ == b.words_;
    }

    std::string to_string() const {
        std::string out(size_, '0');
        for (std::size_t i = 0; i < size_; ++i) {
            if (get(i)) {
                out[i] = '1';
            }
        }
        return out;
    }

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }

    std::vector<std::uint8_t> to_bytes() const {
        std::vector<std::uint8_t> bytes((size_ + 7) / 8, 0);
        for (std::size_t b = 0; b < bytes.size(); ++b) {
            bytes[b] = static_cast<std::uint8_t>(words_[b >> 3] >> (8 * (b & 7)));
        }
        return bytes;
    }

    /// Reads `bit_count` bits from `bytes` (all of them when bit_count is npos).
    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count = npos) {
        if (bit_count == npos) {
            bit_count = bytes.size() * 8;
        }
        require(bit_count <= bytes.size() * 8, ErrorKind::invalid_argument,
                "requested " + std::to_string(bit_count) + " bits from " + std::to_string(bytes.size()) + " bytes");
        BitString out(bit_count);
        const std::size_t needed = (bit_count + 7) / 8;
        for (std::size_t b = 0; b < needed; ++b) {
            out.words_[b >> 3] |= std::uint64_t{bytes[b]} << (8 * (b & 7));
        }
        out.clear_tail();
        return out;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

   private:
    void clear_tail() {
        if ((size_ & 63) != 0 && !words_.empty()) {
            words_.back() &= (std::uint64_t{1} << (size_ & 63)) - 1;
        }
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

inline void write_bit_file(const std::filesystem::path &path, const BitString &bits) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string() + " for writing");
    const auto bytes = bits.to_bytes();
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorKind::io, "write failed for " + path.string());
}

inline BitString read_bit_file(const std::filesystem::path &path, std::size_t bit_count = BitString::npos) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return BitString::from_bytes(bytes, bit_count);
}

}  // namespace siqrng
