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

// Runs every acceptance criterion at its stated tolerance and prints one
// PASS/FAIL line each. Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "siqrng/attack_demo.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/io/counts_record.hpp"
#include "siqrng/rate_model.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"
#include "siqrng/stat_tests.hpp"

namespace {

using namespace siqrng;
namespace fs = std::filesystem;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

std::vector<fs::path> fixture_rows() {
    std::vector<fs::path> out;
    for (const auto &e : fs::directory_iterator(fs::path(SIQRNG_FIXTURE_DIR) / "counts")) {
        if (e.path().extension() == ".json") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// 1. Every table row with its printed phase error reproduces its R within 0.001.
Outcome table_reproduction() {
    int failures = 0;
    double worst = 0.0;
    double slowest = 0.0;
    std::string worst_row;
    const auto rows = fixture_rows();
    for (const auto &path : rows) {
        const auto start = std::chrono::steady_clock::now();
        const io::CountsRecord r = io::ingest_counts(path);
        const AnalysisReport a = io::analyze_record(r, io::PhaseMode::from_record);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        const double diff = std::abs(a.rate - r.rate_reported.value_or(-1.0));
        if (diff > worst) {
            worst = diff;
            worst_row = r.label;
        }
        failures += diff <= 1e-3 ? 0 : 1;
    }
    return {failures == 0 && !rows.empty() && slowest < 1.0,
            fmt("%zu rows, worst |dR| = %.5f (%s), slowest row %.3f s", rows.size(), worst, worst_row.c_str(),
                slowest)};
}

// 2. Full pipeline with the default sampling bound.
Outcome pipeline_reproduction() {
    const fs::path dir = fs::path(SIQRNG_FIXTURE_DIR) / "counts";
    const AnalysisReport main = io::analyze_record(io::ingest_counts(dir / "intensity_9.6.json"));
    const AnalysisReport legacy = io::analyze_record(io::ingest_counts(dir / "legacy_10dB.json"));
    const bool ok = main.rate >= 0.090 && main.rate <= 0.102 && legacy.rate >= 0.165 && legacy.rate <= 0.175;
    return {ok, fmt("mu=9.6: R = %.4f (gamma %.6f, phi %.4f); legacy 10 dB: R = %.4f (phi %.4f)", main.rate,
                    main.gamma, main.phi_z_bar, legacy.rate, legacy.phi_z_bar)};
}

AttackDemoParams attack_params(AttackStrategy strategy, std::vector<double> thresholds) {
    AttackDemoParams p;
    p.rounds = 1'000'000;
    p.dimension = 2;
    p.dark_count = 0.0;
    p.attack.strategy = strategy;
    p.attack.thresholds = std::move(thresholds);
    p.attack.attack_fraction = 1.0;
    p.security = SecurityParams::ideal(2);
    p.security.q = 0.954;
    p.seed = 20260101;
    return p;
}

// 3. Unbalanced blinding: refused by the blinding-aware analysis, fully
// controlled yet certified by the legacy analysis.
Outcome attack_gap() {
    const AttackDemoParams p = attack_params(AttackStrategy::unbalanced, {1.0, 1.5});
    const auto outcomes = run_attack_demo(p);
    const AttackOutcome &aware = outcomes[0];
    const AttackOutcome &legacy = outcomes[1];
    // Same test fraction as the legacy run, so the refusal does not hinge on p_x.
    const AttackOutcome aware_sparse = run_attacked_session(p, Treatment::blinding_aware, 0.01);
    const double n = static_cast<double>(p.rounds);
    const bool aware_ok = aware.length() == 0 && std::abs(aware.tally.x_error_rate() - 0.5) <= 0.005 &&
                          aware_sparse.length() == 0;
    const bool legacy_ok = static_cast<double>(legacy.length()) > 0.5 * n * p.security.q &&
                           legacy.tally.z_single == legacy.tally.z_rounds &&
                           legacy.tally.z_single_on_target == legacy.tally.z_single;
    return {aware_ok && legacy_ok,
            fmt("aware: e_x = %.4f, l = %llu (l = %llu at p_x = 0.01); legacy: l = %llu (> %.0f), target agreement "
                "%.6f over %llu bits",
                aware.tally.x_error_rate(), static_cast<unsigned long long>(aware.length()),
                static_cast<unsigned long long>(aware_sparse.length()),
                static_cast<unsigned long long>(legacy.length()), 0.5 * n * p.security.q, legacy.target_agreement,
                static_cast<unsigned long long>(legacy.tally.z_single))};
}

// 4. Balanced blinding: every X round ends without a click.
Outcome balanced_detection() {
    const AttackDemoParams p = attack_params(AttackStrategy::balanced, {1.0, 1.0});
    const AttackOutcome aware = run_attacked_session(p, Treatment::blinding_aware, 0.5);
    const bool ok = aware.tally.x_error == aware.tally.x_rounds && aware.tally.x_error_rate() == 1.0 &&
                    aware.length() == 0;
    return {ok, fmt("aware: e_x = %.6f (%llu of %llu), l = %llu", aware.tally.x_error_rate(),
                    static_cast<unsigned long long>(aware.tally.x_error),
                    static_cast<unsigned long long>(aware.tally.x_rounds),
                    static_cast<unsigned long long>(aware.length()))};
}

// 5. Simulated tallies against the closed-form expectations, 4 sigma.
Outcome closed_form_vs_monte_carlo() {
    const std::uint64_t rounds = 1'000'000;
    const double p_x = 0.3;
    int points = 0;
    int checks = 0;
    double worst = 0.0;
    std::string worst_where;
    for (double mu_eff : {0.5, 2.0, 5.0}) {
        for (double p_d : {0.0, 1e-3}) {
            for (int d : {2, 4}) {
                ++points;
                std::vector<Treatment> treatments = {Treatment::blinding_aware};
                if (d == 2) {
                    treatments.push_back(Treatment::legacy_squash);
                }
                for (Treatment treatment : treatments) {
                    ChannelModel m;
                    m.mu = mu_eff;
                    m.eta = 1.0;
                    m.dark_count = p_d;
                    m.misalignment = 0.004;
                    m.dimension = d;
                    const ExpectedTally e = treatment == Treatment::legacy_squash
                                                ? expected_tallies_legacy(m, static_cast<double>(rounds), p_x)
                                                : expected_tallies_new(m, static_cast<double>(rounds), p_x);
                    ProtocolParams proto;
                    proto.rounds = rounds;
                    proto.dimension = d;
                    proto.p_x = p_x;
                    proto.treatment = treatment;
                    proto.seed = 7000 + static_cast<std::uint64_t>(points);
                    const TallySummary t = run_session(proto, {SignalSpec::honest(mu_eff, 1.0, 0.004), std::nullopt},
                                                       DetectorBank::uniform(d, 1.0, p_d));
                    // Conditional on the basis split, each count is binomial.
                    const double nx = static_cast<double>(t.x_rounds);
                    const double nz = static_cast<double>(t.z_rounds);
                    auto check = [&](double observed, double expected_share, double population, const char *field) {
                        const double mean = expected_share * population;
                        const double sigma = std::sqrt(population * expected_share * (1.0 - expected_share));
                        const double z = sigma > 0.0 ? std::abs(observed - mean) / sigma
                                                     : (observed == mean ? 0.0 : INFINITY);
                        ++checks;
                        if (z > worst) {
                            worst = z;
                            worst_where = fmt("%s at mu'=%g p_d=%g d=%d %s", field, mu_eff, p_d, d,
                                              std::string(to_string(treatment)).c_str());
                        }
                    };
                    check(nx, p_x, static_cast<double>(rounds), "x_rounds");
                    check(static_cast<double>(t.x_correct), e.x_correct / e.x_rounds, nx, "x_correct");
                    check(static_cast<double>(t.x_error), e.x_error / e.x_rounds, nx, "x_error");
                    check(static_cast<double>(t.x_discarded), e.x_discarded / e.x_rounds, nx, "x_discarded");
                    check(static_cast<double>(t.z_single), e.z_single / e.z_rounds, nz, "z_single");
                    check(static_cast<double>(t.z_no_randomness), e.z_no_randomness / e.z_rounds, nz,
                          "z_no_randomness");
                    check(static_cast<double>(t.z_discarded), e.z_discarded / e.z_rounds, nz, "z_discarded");
                    for (int i = 0; i < d; ++i) {
                        const auto idx = static_cast<std::size_t>(i);
                        check(static_cast<double>(t.z_clicks[idx]), e.z_clicks_per_detector / e.z_rounds, nz,
                              "z_clicks");
                        check(static_cast<double>(t.z_single_clicks[idx]), e.z_single_per_detector / e.z_rounds, nz,
                              "z_single_clicks");
                    }
                }
            }
        }
    }
    return {points == 12 && worst <= 4.0,
            fmt("%d grid points, %d field checks, largest deviation %.2f sigma (%s)", points, checks, worst,
                worst_where.c_str())};
}

// 6. Rate versus intensity for the calibrated setup.
Outcome intensity_curve_shape() {
    std::vector<double> mus;
    for (int i = 0; i <= 160; ++i) {
        mus.push_back(4.0 + 16.0 * i / 160.0);
    }
    const auto curve = intensity_curve(ExperimentCalibration::model(), ExperimentCalibration::rounds,
                                       ExperimentCalibration::p_x, ExperimentCalibration::security(), mus);
    const auto peak = std::max_element(curve.begin(), curve.end(),
                                       [](const IntensityPoint &a, const IntensityPoint &b) { return a.rate < b.rate; });
    const bool ok = std::abs(peak->rate - 0.101) <= 0.01 && peak->mu >= 8.0 && peak->mu <= 11.0;
    return {ok, fmt("peak R = %.4f at mu = %.2f", peak->rate, peak->mu)};
}

// 7. Optimized rate grows with dimension; one million rounds still certify output.
Outcome dimension_benefit() {
    ChannelModel m;
    m.eta = 1.0;
    m.dark_count = 1e-5;
    SecurityParams asymptotic;
    asymptotic.asymptotic = true;
    const auto curve = dimension_curve(m, {2, 3, 4}, 1e9, asymptotic);
    bool increasing = true;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        increasing = increasing && curve[i].optimum.rate > curve[i - 1].optimum.rate;
    }
    const auto finite = dimension_curve(m, {2}, 1e6, SecurityParams{});
    const double r_finite = finite[0].optimum.rate;
    return {increasing && r_finite > 0.0,
            fmt("asymptotic R*: d=2 %.4f, d=3 %.4f, d=4 %.4f; N=1e6 d=2 R* = %.4f (mu %.3f, p_x %.4f)",
                curve[0].optimum.rate, curve[1].optimum.rate, curve[2].optimum.rate, r_finite, finite[0].optimum.mu,
                finite[0].optimum.p_x)};
}

BitString random_bits(RandomStream &rng, std::size_t n) {
    BitString b(n);
    for (std::size_t i = 0; i < n; ++i) {
        b.set(i, rng.next_u64() & 1U);
    }
    return b;
}

// Dense product with T[i][j] = seed[j - i + l - 1].
BitString dense_toeplitz(const BitString &raw, const BitString &seed, std::size_t l) {
    BitString out(l);
    for (std::size_t i = 0; i < l; ++i) {
        bool acc = false;
        for (std::size_t j = 0; j < raw.size(); ++j) {
            acc ^= raw.get(j) && seed.get(j + l - 1 - i);
        }
        out.set(i, acc);
    }
    return out;
}

// 8. Extractor against dense multiplication, plus linearity.
Outcome extractor_oracle() {
    RandomStream rng(88);
    int cases = 0;
    int mismatches = 0;
    for (std::size_t m = 1; m <= 16; ++m) {
        for (std::size_t l = 1; l <= m; ++l) {
            for (int t = 0; t < 100; ++t) {
                const BitString raw = random_bits(rng, m);
                const BitString seed = random_bits(rng, ToeplitzSpec::seed_bits_for(m, l));
                const BitString fast = extract(raw, ToeplitzSpec{m, l, seed});
                mismatches += fast == dense_toeplitz(raw, seed, l) ? 0 : 1;
                ++cases;
            }
        }
    }
    int linearity_failures = 0;
    const std::size_t m = 1024;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t l = 1 + rng.index(static_cast<std::uint32_t>(m));
        const ToeplitzSpec spec{m, l, random_bits(rng, ToeplitzSpec::seed_bits_for(m, l))};
        const BitString a = random_bits(rng, m);
        const BitString b = random_bits(rng, m);
        linearity_failures += extract(a ^ b, spec) == (extract(a, spec) ^ extract(b, spec)) ? 0 : 1;
    }
    return {mismatches == 0 && linearity_failures == 0,
            fmt("%d dense cases, %d mismatches; 1000 linearity pairs at m=1024, %d failures", cases, mismatches,
                linearity_failures)};
}

// Probability, under sampling k of n + k positions holding `errors` errors,
// that the unsampled error rate exceeds sample rate + gamma.
double hypergeometric_violation(int n, int k, int errors, double eps) {
    const int total = n + k;
    auto log_choose = [](int a, int b) { return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0); };
    const double log_all = log_choose(total, k);
    double p = 0.0;
    for (int s = std::max(0, errors - n); s <= std::min(k, errors); ++s) {
        const double rate = static_cast<double>(s) / k;
        const double rest = static_cast<double>(errors - s) / n;
        if (rest > rate + gamma_bound(n, k, rate, eps)) {
            p += std::exp(log_choose(errors, s) + log_choose(total - errors, k - s) - log_all);
        }
    }
    return p;
}

// 9. Default sampling bound against the exact hypergeometric tail.
Outcome gamma_soundness() {
    int exhaustive = 0;
    int violations = 0;
    double worst_ratio = 0.0;
    for (double eps : {0.5, 0.2, 0.05, 0.01, 1e-3, 1e-6}) {
        for (int total = 2; total <= 30; ++total) {
            for (int k = 1; k < total; ++k) {
                for (int errors = 0; errors <= total; ++errors) {
                    const double v = hypergeometric_violation(total - k, k, errors, eps);
                    worst_ratio = std::max(worst_ratio, v / eps);
                    violations += v <= eps ? 0 : 1;
                    ++exhaustive;
                }
            }
        }
    }
    RandomStream rng(99);
    for (int t = 0; t < 1000; ++t) {
        const int total = 31 + static_cast<int>(rng.index(3970));
        const int k = 1 + static_cast<int>(rng.index(static_cast<std::uint32_t>(total - 1)));
        const int errors = static_cast<int>(rng.index(static_cast<std::uint32_t>(total + 1)));
        const double eps = std::pow(10.0, -1.0 - 8.0 * rng.uniform());
        const double v = hypergeometric_violation(total - k, k, errors, eps);
        worst_ratio = std::max(worst_ratio, v / eps);
        violations += v <= eps ? 0 : 1;
    }
    return {violations == 0, fmt("%d exhaustive + 1000 random instances, %d violations, max tail/eps = %.3f",
                                 exhaustive, violations, worst_ratio)};
}

// 10. Honest session -> extractor -> battery; a counter stream must fail.
Outcome battery_behaviour() {
    ProtocolParams proto;
    proto.rounds = 100'000'000;
    proto.dimension = 2;
    proto.p_x = 5e-4;
    proto.seed = 1050;
    const TallySummary tally =
        run_session(proto, {SignalSpec::honest(3.4, 1.0, 0.004), std::nullopt}, DetectorBank::uniform(2, 1.0, 1e-6));
    const AnalysisReport report = key_length(tally, SecurityParams::ideal(2), Treatment::blinding_aware);
    const BitString raw = raw_bits(tally, 2);
    RandomStream seed_stream(2050);
    const BitString out = extract(raw, plan_extraction(report, raw.size(), seed_stream));

    stats::BatteryConfig config;
    config.count = 100;
    config.length = 100'000;
    if (out.size() < config.count * config.length) {
        return {false, fmt("only %zu certified bits extracted, need %zu", out.size(), config.count * config.length)};
    }
    const stats::BatteryReport honest = stats::run_battery(out, config);
    double min_proportion = 1.0;
    double min_uniformity = 1.0;
    for (const auto &r : honest.results) {
        min_proportion = std::min(min_proportion, r.proportion);
        min_uniformity = std::min(min_uniformity, r.uniformity);
    }

    BitString counter(config.count * config.length);
    for (std::size_t w = 0; w < counter.size() / 32; ++w) {
        for (int b = 0; b < 32; ++b) {
            counter.set(w * 32 + static_cast<std::size_t>(b), (static_cast<std::uint32_t>(w) >> (31 - b)) & 1U);
        }
    }
    const stats::BatteryReport bad = stats::run_battery(counter, config);
    bool frequency_family_fails = true;
    for (const auto &r : bad.results) {
        if (r.name == "frequency" || r.name == "block_frequency") {
            frequency_family_fails = frequency_family_fails && !r.pass;
        }
    }
    return {honest.all_pass() && frequency_family_fails,
            fmt("%zu raw bits -> %zu certified (R = %.4f); honest: min proportion %.4f (>= %.4f), min P-value_T "
                "%.2e, %s; counter: frequency family %s",
                raw.size(), out.size(), report.rate, min_proportion, config.proportion_threshold(), min_uniformity,
                honest.all_pass() ? "all pass" : "FAILS", frequency_family_fails ? "fails" : "PASSES")};
}

struct Criterion {
    int id;
    const char *name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "table reproduction (reported phase error)", 18.0, table_reproduction},
        {2, "pipeline reproduction (computed gamma)", 1.0, pipeline_reproduction},
        {3, "attack gap under unbalanced blinding", 30.0, attack_gap},
        {4, "balanced blinding detected", 30.0, balanced_detection},
        {5, "closed form vs Monte Carlo", 300.0, closed_form_vs_monte_carlo},
        {6, "rate vs intensity peak", 10.0, intensity_curve_shape},
        {7, "dimension benefit and small-N rate", 60.0, dimension_benefit},
        {8, "extractor oracle", 60.0, extractor_oracle},
        {9, "gamma bound soundness", 60.0, gamma_soundness},
        {10, "battery behaviour", 300.0, battery_behaviour},
    };
    int failed = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = seconds <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("[%s] AC%-2d %s: %s (%.1f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    seconds, c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
