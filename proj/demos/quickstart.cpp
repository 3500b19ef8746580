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

// End-to-end walk through the library: simulate an honest session, bound
// the extractable randomness, hash the raw bits and run the test battery.

#include <cstdio>

#include "siqrng/extractor.hpp"
#include "siqrng/security.hpp"
#include "siqrng/session.hpp"
#include "siqrng/stat_tests.hpp"

int main() {
    siqrng::ProtocolParams protocol;
    protocol.rounds = 4'000'000;
    protocol.dimension = 2;
    protocol.p_x = 1e-3;
    protocol.seed = 20261016;

    const siqrng::SessionSource source{siqrng::SignalSpec::honest(3.4, 1.0, 0.004), std::nullopt};
    const siqrng::DetectorBank bank = siqrng::DetectorBank::uniform(2, 1.0, 1e-6);
    const siqrng::TallySummary tally = siqrng::run_session(protocol, source, bank);

    const siqrng::SecurityParams security = siqrng::SecurityParams::ideal(2);
    const siqrng::AnalysisReport report = siqrng::key_length(tally, security, protocol.treatment);
    std::printf("rounds %llu  X error %.4f  phi_z_bar %.4f  certified %llu bits  R = %.4f\n",
                static_cast<unsigned long long>(tally.rounds), report.e_x, report.phi_z_bar,
                static_cast<unsigned long long>(report.length), report.rate);

    const siqrng::BitString raw = siqrng::raw_bits(tally, protocol.dimension);
    siqrng::RandomStream seed_stream(protocol.seed + 1);
    const siqrng::ToeplitzSpec spec = siqrng::plan_extraction(report, raw.size(), seed_stream);
    const siqrng::BitString output = siqrng::extract(raw, spec);
    std::printf("hashed %zu raw bits to %zu output bits\n", raw.size(), output.size());

    siqrng::stats::BatteryConfig battery;
    battery.count = 10;
    if (output.size() < battery.count * 1000) {
        std::printf("too little output for the test battery\n");
        return 1;
    }
    battery.length = output.size() / battery.count;
    for (const auto &row : siqrng::stats::run_battery(output, battery).results) {
        std::printf("  %-26s proportion %.2f  %s\n", row.name.c_str(), row.proportion, row.pass ? "pass" : "FAIL");
    }
    return 0;
}
