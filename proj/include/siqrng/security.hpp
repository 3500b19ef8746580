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
#include <optional>
#include <string>
#include <string_view>

#include "siqrng/detector.hpp"
#include "siqrng/error.hpp"
#include "siqrng/session.hpp"

namespace siqrng {

/// Tail bound used to extend the observed X error rate to the unsampled rounds.
enum class SamplingBound {
    /// Chernoff bound in relative-entropy form, inverted numerically.
    kl_chernoff,
    /// sqrt((n+k)(k+1)/(n k^2) * ln(1/eps) / 2).
    closed_form,
};

inline std::string_view to_string(SamplingBound b) {
    return b == SamplingBound::kl_chernoff ? "kl_chernoff" : "closed_form";
}

inline SamplingBound parse_sampling_bound(std::string_view name) {
    if (name == "kl_chernoff" || name == "kl") {
        return SamplingBound::kl_chernoff;
    }
    if (name == "closed_form") {
        return SamplingBound::closed_form;
    }
    throw Error(ErrorKind::invalid_argument, "unknown sampling bound '" + std::string(name) + "'");
}

struct SecrecyBudget {
    double smoothing = 0.0;
    double sampling = 0.0;
    double hashing = 0.0;
};

/// Equal three-way split of the total secrecy parameter.
inline SecrecyBudget secrecy_budget(double eps_sec) {
    require(eps_sec > 0.0 && eps_sec < 1.0, ErrorKind::invalid_argument, "epsilon_sec must lie in (0, 1)");
    const double part = eps_sec / 3.0;
    return {part, part, part};
}

struct SecurityParams {
    double eps_sec = 1e-9;
    double q = 0.954;     // basis incompatibility
    double eta_e = 1.0;   // detection-balance coefficient
    SamplingBound bound = SamplingBound::kl_chernoff;
    /// Infinite-data limit: no sampling correction, no hashing penalty.
    bool asymptotic = false;

    static SecurityParams ideal(int d) {
        SecurityParams p;
        p.q = std::log2(static_cast<double>(d));
        return p;
    }

    void validate(int d) const {
        require(eps_sec > 0.0 && eps_sec < 1.0, ErrorKind::invalid_argument, "epsilon_sec must lie in (0, 1)");
        require(q > 0.0 && q <= std::log2(static_cast<double>(d)) + 1e-12, ErrorKind::invalid_argument,
                "q must lie in (0, log2 d]");
        require(eta_e > 0.0 && eta_e <= 1.0, ErrorKind::invalid_argument, "eta_e must lie in (0, 1]");
    }
};

namespace detail {

/// Binary relative entropy D(a || b) in nats.
inline double binary_kl(double a, double b) {
    double out = 0.0;
    if (a > 0.0) {
        out += a * std::log(a / b);
    }
    if (a < 1.0) {
        out += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
    }
    return out;
}

/// Smallest p >= rate with k * D(rate || p) >= ln(1/eps), up to bisection
/// resolution, rounded upwards.
inline double kl_upper_confidence(double rate, double k, double eps) {
    const double budget = std::log(1.0 / eps) / k;
    if (rate >= 1.0) {
        return 1.0;
    }
    // D(rate || p) -> infinity as p -> 1, so the root is below 1.
    double lo = rate;
    double hi = 1.0;
    if (binary_kl(rate, std::nextafter(1.0, 0.0)) <= budget) {
        return 1.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (binary_kl(rate, mid) > budget) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace detail

/// Increment gamma such that, after sampling k of n + k positions uniformly
/// without replacement and observing error rate `rate` on the sample, the
/// error rate on the n unsampled positions exceeds rate + gamma with
/// probability at most eps. Clamped so rate + gamma <= 1.
inline double gamma_bound(double n, double k, double rate, double eps,
                          SamplingBound bound = SamplingBound::kl_chernoff) {
    require(k >= 1.0, ErrorKind::insufficient_test_data, "no test rounds to estimate the X error rate from");
    require(n >= 1.0, ErrorKind::invalid_argument, "population outside the sample must be >= 1");
    require(rate >= 0.0 && rate <= 1.0, ErrorKind::invalid_argument, "observed rate outside [0, 1]");
    require(eps > 0.0 && eps < 1.0, ErrorKind::invalid_argument, "failure probability must lie in (0, 1)");
    double gamma = 0.0;
    if (bound == SamplingBound::closed_form) {
        gamma = std::sqrt((n + k) * (k + 1.0) / (n * k * k) * std::log(1.0 / eps) / 2.0);
    } else {
        // Population rate p <= p_bar except with probability eps; the
        // unsampled rate is ((n + k) p - k rate) / n.
        const double p_bar = detail::kl_upper_confidence(rate, k, eps);
        gamma = (n + k) * (p_bar - rate) / n;
    }
    return std::min(gamma, 1.0 - rate);
}

/// d-ary entropy h_d(x) = -x log2(x/(d-1)) - (1-x) log2(1-x), held at its
/// maximum log2 d for x beyond (d-1)/d.
inline double entropy_hd(double x, int d) {
    require(x >= 0.0 && x <= 1.0, ErrorKind::invalid_argument, "entropy argument outside [0, 1]");
    require(d >= 2, ErrorKind::invalid_argument, "dimension must be >= 2");
    const double dd = static_cast<double>(d);
    if (x >= (dd - 1.0) / dd) {
        return std::log2(dd);
    }
    double h = 0.0;
    if (x > 0.0) {
        h -= x * std::log2(x / (dd - 1.0));
    }
    h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

struct PhaseErrorBound {
    double value = 0.0;
    bool saturated = false;
};

/// Phase-error bound assuming every X-type error lands on a single-click Z
/// round: e_x_bar * N_z / N_z^s, capped at (d-1)/d.
inline PhaseErrorBound phase_error_upper(double e_x_bar, double z_rounds, double z_single, int d) {
    require(z_single >= 1.0, ErrorKind::no_extractable_rounds, "no single-click Z rounds");
    const double cap = (static_cast<double>(d) - 1.0) / static_cast<double>(d);
    const double raw = e_x_bar * z_rounds / z_single;
    if (raw >= cap) {
        return {cap, true};
    }
    return {raw, false};
}

/// What the length computation needs, independent of where the counts came from.
struct Evidence {
    int dimension = 2;
    double rounds = 0.0;        // N, denominator of R
    double x_rounds = 0.0;      // all X rounds, drives the seed cost
    double test_rounds = 0.0;   // sample the error rate was measured on
    double x_error_rate = 0.0;
    double z_population = 0.0;  // rounds the bound is extended to
    double z_single = 0.0;
};

/// Evidence for `treatment` from simulated tallies. Legacy uses clicked
/// rounds only.
inline Evidence evidence_from_tally(const TallySummary &tally, Treatment treatment) {
    Evidence e;
    e.dimension = tally.dimension;
    e.rounds = static_cast<double>(tally.rounds);
    e.x_rounds = static_cast<double>(tally.x_rounds);
    e.test_rounds = static_cast<double>(tally.x_tested());
    e.x_error_rate = tally.x_error_rate();
    e.z_population =
        static_cast<double>(treatment == Treatment::legacy_squash ? tally.z_clicked() : tally.z_rounds);
    e.z_single = static_cast<double>(tally.z_single);
    return e;
}

struct AnalysisReport {
    Treatment treatment = Treatment::blinding_aware;
    SamplingBound bound = SamplingBound::kl_chernoff;
    bool asymptotic = false;
    bool phase_overridden = false;
    double e_x = 0.0;
    double gamma = 0.0;
    double e_x_bar = 0.0;
    double phi_z_bar = 0.0;
    bool phase_saturated = false;
    double entropy = 0.0;  // h_d(phi_z_bar)
    std::uint64_t n_seeds = 0;
    double hashing_penalty = 0.0;  // 2 log2(3 / (2 eps_sec))
    double length_unclamped = 0.0;
    std::uint64_t length = 0;
    double rounds = 0.0;
    double rate = 0.0;  // length / rounds
};

/// Certified output length.
///
/// blinding_aware: l = eta_e (N_z^s [q - h_d(phi)] - 2 log2(3/(2 eps_sec))) - n_seeds
/// legacy_squash:  l = n_z^s [q - h_d(phi)] - 2 log2(3/(2 eps_sec)) - n_seeds
///
/// with phi from phase_error_upper(e_x + gamma, ...). A phase override skips
/// the sampling step and uses the given phi directly. The result is floored
/// to whole bits and clamped at zero.
inline AnalysisReport key_length(const Evidence &ev, const SecurityParams &sec, Treatment treatment,
                                 std::optional<double> phase_override = std::nullopt) {
    sec.validate(ev.dimension);
    require(ev.rounds >= 1.0, ErrorKind::invalid_argument, "rounds must be >= 1");
    AnalysisReport r;
    r.treatment = treatment;
    r.bound = sec.bound;
    r.asymptotic = sec.asymptotic;
    r.rounds = ev.rounds;
    r.e_x = ev.x_error_rate;

    if (phase_override) {
        require(*phase_override >= 0.0 && *phase_override <= 1.0, ErrorKind::invalid_argument,
                "phase override outside [0, 1]");
        require(ev.z_single >= 1.0, ErrorKind::no_extractable_rounds, "no single-click Z rounds");
        r.phase_overridden = true;
        r.e_x_bar = r.e_x;
        const double cap = (ev.dimension - 1.0) / ev.dimension;
        r.phi_z_bar = std::min(*phase_override, cap);
        r.phase_saturated = *phase_override >= cap;
    } else {
        if (!sec.asymptotic) {
            const SecrecyBudget budget = secrecy_budget(sec.eps_sec);
            r.gamma = gamma_bound(ev.z_population, ev.test_rounds, r.e_x, budget.sampling, sec.bound);
        } else {
            require(ev.test_rounds > 0.0, ErrorKind::insufficient_test_data,
                    "no test rounds to estimate the X error rate from");
        }
        r.e_x_bar = std::min(1.0, r.e_x + r.gamma);
        const PhaseErrorBound phase = phase_error_upper(r.e_x_bar, ev.z_population, ev.z_single, ev.dimension);
        r.phi_z_bar = phase.value;
        r.phase_saturated = phase.saturated;
    }

    r.entropy = r.phase_saturated ? std::log2(static_cast<double>(ev.dimension)) : entropy_hd(r.phi_z_bar, ev.dimension);
    r.n_seeds = seed_cost(ev.rounds, ev.x_rounds, ev.dimension, treatment);
    r.hashing_penalty = sec.asymptotic ? 0.0 : 2.0 * std::log2(3.0 / (2.0 * sec.eps_sec));
    const double core = ev.z_single * (sec.q - r.entropy) - r.hashing_penalty;
    const double coefficient = treatment == Treatment::blinding_aware ? sec.eta_e : 1.0;
    r.length_unclamped = coefficient * core - static_cast<double>(r.n_seeds);
    r.length = r.length_unclamped > 0.0 ? static_cast<std::uint64_t>(std::floor(r.length_unclamped)) : 0;
    r.rate = static_cast<double>(r.length) / ev.rounds;
    return r;
}

inline AnalysisReport key_length(const TallySummary &tally, const SecurityParams &sec, Treatment treatment,
                                 std::optional<double> phase_override = std::nullopt) {
    return key_length(evidence_from_tally(tally, treatment), sec, treatment, phase_override);
}

}  // namespace siqrng
