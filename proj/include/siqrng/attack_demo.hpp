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
#include <optional>
#include <vector>

#include "siqrng/adversary.hpp"
#include "siqrng/detector.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"

namespace siqrng {

/// One attacked session analysed under one treatment.
struct AttackOutcome {
    Treatment treatment = Treatment::blinding_aware;
    double p_x = 0.0;
    TallySummary tally;
    std::optional<AnalysisReport> report;  // empty when the analysis refused the data
    std::optional<Error> refusal;
    /// Share of single-click Z rounds whose outcome equals Eve's target.
    double target_agreement = 0.0;

    std::uint64_t length() const { return report ? report->length : 0; }
};

struct AttackDemoParams {
    std::uint64_t rounds = 1'000'000;
    int dimension = 2;
    double dark_count = 0.0;
    /// Honest pulse for rounds Eve leaves alone.
    double mu = 3.4;
    double transmittance = 1.0;
    double misalignment = 0.0;
    AttackConfig attack;
    std::vector<std::pair<Treatment, double>> variants = {{Treatment::blinding_aware, 0.5},
                                                          {Treatment::legacy_squash, 0.01}};
    SecurityParams security;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

inline AttackOutcome run_attacked_session(const AttackDemoParams &p, Treatment treatment, double p_x) {
    ProtocolParams proto;
    proto.rounds = p.rounds;
    proto.dimension = p.dimension;
    proto.p_x = p_x;
    proto.treatment = treatment;
    proto.seed = p.seed;
    proto.threads = p.threads;
    SessionSource source{SignalSpec::honest(p.mu, p.transmittance, p.misalignment), p.attack};
    const DetectorBank bank = DetectorBank::uniform(p.dimension, 1.0, p.dark_count);

    AttackOutcome out;
    out.treatment = treatment;
    out.p_x = p_x;
    out.tally = run_session(proto, source, bank);
    out.target_agreement = out.tally.z_single == 0 ? 0.0
                                                   : static_cast<double>(out.tally.z_single_on_target) /
                                                         static_cast<double>(out.tally.z_single);
    try {
        out.report = key_length(out.tally, p.security, treatment);
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::insufficient_test_data && e.kind() != ErrorKind::no_extractable_rounds) {
            throw;
        }
        out.refusal = e;
    }
    return out;
}

/// Same attack, same seed, every configured treatment.
inline std::vector<AttackOutcome> run_attack_demo(const AttackDemoParams &p) {
    std::vector<AttackOutcome> out;
    for (const auto &[treatment, p_x] : p.variants) {
        out.push_back(run_attacked_session(p, treatment, p_x));
    }
    return out;
}

}  // namespace siqrng
