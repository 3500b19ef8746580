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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "siqrng/bits.hpp"
#include "siqrng/random.hpp"
#include "siqrng/stat_tests.hpp"

namespace siqrng::stats {
namespace {

// ---- Reference implementations, written directly from the test definitions
// on unpacked bit vectors, with their own incomplete gamma function. ----

namespace ref {

using Bits = std::vector<int>;

Bits unpack(const BitString &b) {
    Bits out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        out[i] = b.get(i) ? 1 : 0;
    }
    return out;
}

// Upper regularized incomplete gamma by series / Lentz continued fraction.
double gammq(double a, double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) {
                break;
            }
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

double frequency(const Bits &e) {
    double s = 0;
    for (int b : e) {
        s += b ? 1 : -1;
    }
    return std::erfc(std::abs(s) / std::sqrt(static_cast<double>(e.size())) / std::sqrt(2.0));
}

double block_frequency(const Bits &e, std::size_t m) {
    const std::size_t n = e.size() / m;
    double chi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double ones = 0;
        for (std::size_t j = 0; j < m; ++j) {
            ones += e[i * m + j];
        }
        const double pi = ones / static_cast<double>(m);
        chi += 4.0 * static_cast<double>(m) * (pi - 0.5) * (pi - 0.5);
    }
    return gammq(static_cast<double>(n) / 2.0, chi / 2.0);
}

double runs(const Bits &e) {
    const double n = static_cast<double>(e.size());
    double ones = 0;
    for (int b : e) {
        ones += b;
    }
    const double pi = ones / n;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) {
        return 0.0;
    }
    double v = 1;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        v += e[k] != e[k + 1] ? 1 : 0;
    }
    return std::erfc(std::abs(v - 2 * n * pi * (1 - pi)) / (2 * std::sqrt(2 * n) * pi * (1 - pi)));
}

double longest_run(const Bits &e) {
    const std::size_t n = e.size();
    std::size_t m;
    std::vector<int> bounds;  // upper edge of each class except the last
    std::vector<double> pi;
    if (n < 6272) {
        m = 8;
        bounds = {1, 2, 3};
        pi = {0.2148, 0.3672, 0.2305, 0.1875};
    } else if (n < 750000) {
        m = 128;
        bounds = {4, 5, 6, 7, 8};
        pi = {0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124};
    } else {
        m = 10000;
        bounds = {10, 11, 12, 13, 14, 15};
        pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
    }
    const std::size_t blocks = n / m;
    std::vector<double> v(pi.size(), 0);
    for (std::size_t i = 0; i < blocks; ++i) {
        int best = 0;
        int run = 0;
        for (std::size_t j = 0; j < m; ++j) {
            run = e[i * m + j] ? run + 1 : 0;
            best = std::max(best, run);
        }
        std::size_t cls = 0;
        while (cls < bounds.size() && best > bounds[cls]) {
            ++cls;
        }
        v[cls] += 1;
    }
    double chi = 0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        const double ex = static_cast<double>(blocks) * pi[i];
        chi += (v[i] - ex) * (v[i] - ex) / ex;
    }
    return gammq(static_cast<double>(pi.size() - 1) / 2.0, chi / 2.0);
}

double cusum(Bits e, bool forward) {
    if (!forward) {
        std::reverse(e.begin(), e.end());
    }
    const double n = static_cast<double>(e.size());
    double s = 0;
    double z = 0;
    for (int b : e) {
        s += b ? 1 : -1;
        z = std::max(z, std::abs(s));
    }
    double sum1 = 0;
    for (int k = static_cast<int>((-n / z + 1) / 4); k <= static_cast<int>((n / z - 1) / 4); ++k) {
        sum1 += normal_cdf((4 * k + 1) * z / std::sqrt(n)) - normal_cdf((4 * k - 1) * z / std::sqrt(n));
    }
    double sum2 = 0;
    for (int k = static_cast<int>((-n / z - 3) / 4); k <= static_cast<int>((n / z - 1) / 4); ++k) {
        sum2 += normal_cdf((4 * k + 3) * z / std::sqrt(n)) - normal_cdf((4 * k + 1) * z / std::sqrt(n));
    }
    return 1.0 - sum1 + sum2;
}

// Circular overlapping counts of every m-bit pattern.
std::vector<double> pattern_counts(const Bits &e, int m) {
    std::vector<double> c(std::size_t{1} << m, 0);
    const std::size_t n = e.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t v = 0;
        for (int j = 0; j < m; ++j) {
            v = (v << 1) | static_cast<std::size_t>(e[(i + static_cast<std::size_t>(j)) % n]);
        }
        c[v] += 1;
    }
    return c;
}

double approximate_entropy(const Bits &e, int m) {
    const double n = static_cast<double>(e.size());
    auto phi = [&](int len) {
        double s = 0;
        for (double c : pattern_counts(e, len)) {
            if (c > 0) {
                s += c / n * std::log(c / n);
            }
        }
        return s;
    };
    const double apen = phi(m) - phi(m + 1);
    return gammq(std::pow(2.0, m - 1), n * (std::log(2.0) - apen));
}

std::pair<double, double> serial(const Bits &e, int m) {
    const double n = static_cast<double>(e.size());
    auto psi = [&](int len) {
        if (len == 0) {
            return 0.0;
        }
        double s = 0;
        for (double c : pattern_counts(e, len)) {
            s += c * c;
        }
        return std::pow(2.0, len) / n * s - n;
    };
    const double d1 = psi(m) - psi(m - 1);
    const double d2 = psi(m) - 2 * psi(m - 1) + psi(m - 2);
    return {gammq(std::pow(2.0, m - 2), d1 / 2), gammq(std::pow(2.0, m - 3), d2 / 2)};
}

}  // namespace ref

BitString random_bits(RandomStream &rng, std::size_t n) {
    std::vector<std::uint64_t> w((n + 63) / 64);
    for (auto &x : w) {
        x = rng.next_u64();
    }
    return BitString::from_words(std::move(w), n);
}

// 100-bit worked example with published P-values.
const char *kWorkedExample =
    "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

TEST(WorkedExamples, PublishedPValues) {
    const BitString e = BitString::from_string(kWorkedExample);
    EXPECT_NEAR(frequency_monobit(e), 0.109599, 1e-6);
    EXPECT_NEAR(runs_test(e), 0.500798, 1e-6);
    EXPECT_NEAR(block_frequency(e, 10), 0.706438, 1e-6);
    EXPECT_NEAR(cumulative_sums(e, true), 0.219194, 1e-6);
    EXPECT_NEAR(cumulative_sums(e, false), 0.114866, 1e-6);
    EXPECT_NEAR(approximate_entropy(e, 2), 0.235301, 1e-6);
}

TEST(WorkedExamples, LongestRunOf128Bits) {
    const BitString e = BitString::from_string(
        "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100"
        "111001101101100010110010");
    // Published 0.180609 was computed from a rounded chi-square.
    EXPECT_NEAR(longest_run(e), 0.180609, 2e-5);
}

TEST(Frequency, DocumentedCases) {
    std::string alt;
    for (int i = 0; i < 50; ++i) {
        alt += "01";
    }
    EXPECT_DOUBLE_EQ(frequency_monobit(BitString::from_string(alt)), 1.0);
    const BitString zeros(100);
    EXPECT_NEAR(frequency_monobit(zeros) / std::erfc(10.0 / std::sqrt(2.0)), 1.0, 1e-12);
    EXPECT_NEAR(frequency_monobit(zeros), 1.52e-23, 0.01e-23);
    EXPECT_THROW(frequency_monobit(BitString(99)), Error);
}

TEST(Runs, DocumentedCases) {
    std::string alt;
    for (int i = 0; i < 50; ++i) {
        alt += "01";
    }
    const BitString a = BitString::from_string(alt);
    EXPECT_LT(runs_test(a), 1e-6);
    EXPECT_NEAR(runs_test(a), ref::runs(ref::unpack(a)), 1e-15);
    BitString ones(200);
    for (std::size_t i = 0; i < 200; ++i) {
        ones.set(i, true);
    }
    EXPECT_EQ(runs_test(ones), 0.0);
}

TEST(ReferenceAgreement, FiftyRandomSequencesPerSize) {
    RandomStream rng(42);
    for (std::size_t n : {100, 128, 1000, 6272, 20000}) {
        for (int t = 0; t < 50; ++t) {
            const BitString b = random_bits(rng, n);
            const ref::Bits e = ref::unpack(b);
            EXPECT_NEAR(frequency_monobit(b), ref::frequency(e), 1e-10);
            if (n >= 128) {
                EXPECT_NEAR(block_frequency(b, 128), ref::block_frequency(e, 128), 1e-10);
                EXPECT_NEAR(longest_run(b), ref::longest_run(e), 1e-10);
            }
            EXPECT_NEAR(block_frequency(b, 10), ref::block_frequency(e, 10), 1e-10);
            EXPECT_NEAR(runs_test(b), ref::runs(e), 1e-10);
            EXPECT_NEAR(cumulative_sums(b, true), ref::cusum(e, true), 1e-10);
            EXPECT_NEAR(cumulative_sums(b, false), ref::cusum(e, false), 1e-10);
            EXPECT_NEAR(approximate_entropy(b, 2), ref::approximate_entropy(e, 2), 1e-10);
            const auto s = serial(b, 3);
            const auto rs = ref::serial(e, 3);
            EXPECT_NEAR(s[0], rs.first, 1e-10);
            EXPECT_NEAR(s[1], rs.second, 1e-10);
        }
    }
}

TEST(ReferenceAgreement, LongestRunLargeBlockTable) {
    RandomStream rng(43);
    for (int t = 0; t < 3; ++t) {
        const BitString b = random_bits(rng, 750000);
        EXPECT_NEAR(longest_run(b), ref::longest_run(ref::unpack(b)), 1e-10);
    }
}

TEST(Igamc, AgreesWithIndependentImplementation) {
    for (double a : {0.5, 1.0, 1.5, 4.5, 10.0, 50.0, 3906.0}) {
        for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 60.0, 3900.0}) {
            const double expected = ref::gammq(a, x);
            EXPECT_NEAR(igamc(a, x), expected, 1e-12 + 1e-10 * expected) << a << " " << x;
        }
    }
}

TEST(Battery, ProportionThreshold) {
    BatteryConfig c;
    EXPECT_NEAR(c.proportion_threshold(), 0.99 - 3 * std::sqrt(0.99 * 0.01 / 100), 1e-15);
    EXPECT_NEAR(c.proportion_threshold(), 0.9602, 5e-5);
}

TEST(Battery, PseudorandomInputPassesAndIsDeterministic) {
    RandomStream rng(44);
    BatteryConfig c;
    c.count = 100;
    c.length = 20000;
    const BitString stream = random_bits(rng, c.count * c.length);
    const BatteryReport a = run_battery(stream, c);
    const BatteryReport b = run_battery(stream, c);
    ASSERT_EQ(a.results.size(), 9U);
    EXPECT_EQ(a.not_implemented.size(), 8U);
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        EXPECT_EQ(a.results[i].p_values, b.results[i].p_values);
        for (double p : a.results[i].p_values) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
        EXPECT_GE(a.results[i].proportion, 0.0);
        EXPECT_LE(a.results[i].proportion, 1.0);
    }
    EXPECT_TRUE(a.all_pass());
}

TEST(Battery, UniformityHoldsInMostRepeatedRuns) {
    BatteryConfig c;
    c.count = 100;
    c.length = 2000;
    int good = 0;
    int total = 0;
    for (std::uint64_t run = 0; run < 20; ++run) {
        RandomStream rng(1000 + run);
        for (const auto &r : run_battery(random_bits(rng, c.count * c.length), c).results) {
            ++total;
            good += r.uniformity >= kUniformityThreshold ? 1 : 0;
        }
    }
    EXPECT_GE(good, static_cast<int>(0.95 * total));
}

TEST(Battery, CounterSequenceFailsFrequencyFamily) {
    BatteryConfig c;
    c.count = 100;
    c.length = 3200;
    BitString stream(c.count * c.length);
    for (std::size_t w = 0; w < stream.size() / 32; ++w) {
        const auto value = static_cast<std::uint32_t>(w);
        for (int b = 0; b < 32; ++b) {
            stream.set(w * 32 + static_cast<std::size_t>(b), (value >> (31 - b)) & 1U);
        }
    }
    const BatteryReport r = run_battery(stream, c);
    for (const auto &row : r.results) {
        if (row.name == "frequency" || row.name == "block_frequency" || row.name == "cumulative_sums_forward") {
            EXPECT_FALSE(row.pass) << row.name;
            EXPECT_LT(row.proportion, c.proportion_threshold()) << row.name;
        }
    }
    EXPECT_FALSE(r.all_pass());
}

TEST(Battery, InsufficientData) {
    BatteryConfig c;
    c.count = 10;
    c.length = 1000;
    try {
        run_battery(BitString(9999), c);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::insufficient_test_data);
    }
    c.alpha = 1.0;
    EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace siqrng::stats
