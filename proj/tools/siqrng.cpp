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

// Command-line front end: simulate, analyze, rate-curve, optimize,
// attack-demo, extract, test-battery.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "siqrng/attack_demo.hpp"
#include "siqrng/bits.hpp"
#include "siqrng/error.hpp"
#include "siqrng/extractor.hpp"
#include "siqrng/io/counts_record.hpp"
#include "siqrng/io/report.hpp"
#include "siqrng/io/session_config.hpp"
#include "siqrng/rate_model.hpp"
#include "siqrng/session.hpp"
#include "siqrng/stat_tests.hpp"

namespace {

using siqrng::Error;
using siqrng::ErrorKind;
using siqrng::io::Json;

constexpr int kExitUsage = 64;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
            return 2;
        case ErrorKind::insufficient_test_data:
            return 3;
        case ErrorKind::no_extractable_rounds:
            return 4;
        case ErrorKind::infeasible_attack:
            return 5;
        case ErrorKind::unsupported:
            return 6;
        case ErrorKind::inconsistent_analysis:
            return 7;
        case ErrorKind::schema:
            return 8;
        case ErrorKind::io:
            return 9;
    }
    return 1;
}

void emit(const std::string &text, const std::string &path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << '\n';
        }
    } else {
        siqrng::io::write_text_file(path, text);
    }
}

std::uint64_t parse_count(double value, const char *name) {
    siqrng::require(value >= 1.0 && value == std::floor(value) && value < 1.8e19, ErrorKind::invalid_argument,
                    std::string(name) + " must be a positive integer");
    return static_cast<std::uint64_t>(value);
}

/// Model flags shared by rate-curve and optimize.
struct ModelOptions {
    std::string preset = "experiment";
    std::optional<double> eta;
    std::optional<double> dark_count;
    std::optional<double> misalignment;
    int dimension = 2;
    double rounds = 1e9;
    std::optional<double> p_x;
    std::optional<double> q;
    std::optional<double> eta_e;
    double eps_sec = 1e-9;
    std::string bound = "kl_chernoff";
    bool asymptotic = false;

    void add_to(CLI::App &app) {
        app.add_option("--model", preset, "Starting point: experiment (calibrated setup) or ideal")
            ->check(CLI::IsMember({"experiment", "ideal"}));
        app.add_option("--eta", eta, "Total transmittance including detector efficiency");
        app.add_option("--p-d", dark_count, "Dark-count probability per detector per round");
        app.add_option("--e-d", misalignment, "Misalignment error probability");
        app.add_option("--d", dimension, "Number of outcomes");
        app.add_option("--rounds", rounds, "Total rounds N");
        app.add_option("--p-x", p_x, "Probability of an X (test) round");
        app.add_option("--q", q, "Basis incompatibility q (default: calibrated value or log2 d)");
        app.add_option("--eta-e", eta_e, "Detection-balance coefficient");
        app.add_option("--epsilon-sec", eps_sec, "Total secrecy parameter");
        app.add_option("--bound", bound, "Sampling bound: kl_chernoff or closed_form");
        app.add_flag("--asymptotic", asymptotic, "Infinite-data limit (no sampling or hashing penalty)");
    }

    siqrng::ChannelModel model() const {
        siqrng::ChannelModel m;
        if (preset == "experiment") {
            m = siqrng::ExperimentCalibration::model();
        } else {
            m.eta = 1.0;
            m.dark_count = 0.0;
        }
        m.dimension = dimension;
        if (eta) {
            m.eta = *eta;
        }
        if (dark_count) {
            m.dark_count = *dark_count;
        }
        if (misalignment) {
            m.misalignment = *misalignment;
        }
        m.validate();
        return m;
    }

    double test_probability() const {
        return p_x.value_or(preset == "experiment" ? siqrng::ExperimentCalibration::p_x : 0.01);
    }

    siqrng::SecurityParams security() const {
        siqrng::SecurityParams s = preset == "experiment" && dimension == 2 ? siqrng::ExperimentCalibration::security()
                                                                            : siqrng::SecurityParams::ideal(dimension);
        if (q) {
            s.q = *q;
        }
        if (eta_e) {
            s.eta_e = *eta_e;
        }
        s.eps_sec = eps_sec;
        s.bound = siqrng::parse_sampling_bound(bound);
        s.asymptotic = asymptotic;
        s.validate(dimension);
        return s;
    }
};

std::vector<double> linear_points(double lo, double hi, int n) {
    siqrng::require(n >= 2 && hi > lo, ErrorKind::invalid_argument, "sweep needs at least two points and hi > lo");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(lo + (hi - lo) * i / (n - 1));
    }
    return out;
}

int run(int argc, char **argv) {
    CLI::App app{"Source-independent QRNG toolkit: simulation, finite-size analysis, extraction and testing"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config;
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out;
    std::string sim_raw_out;
    std::string sim_counts_out;
    std::optional<double> sim_rounds;
    auto *simulate = app.add_subcommand("simulate", "Run a session from a config; print tallies and analysis");
    simulate->add_option("--config", sim_config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--seed", sim_seed, "Master seed (required)")->required();
    simulate->add_option("--rounds", sim_rounds, "Override N from the config");
    simulate->add_option("--out", sim_out, "Report path (default stdout)");
    simulate->add_option("--raw-out", sim_raw_out, "Write raw single-click Z bits to this file");
    simulate->add_option("--counts-out", sim_counts_out, "Write the tallies as a counts record");

    // analyze
    std::string an_counts;
    bool an_use_phi = false;
    std::string an_bound = "kl_chernoff";
    bool an_asymptotic = false;
    std::string an_out;
    auto *analyze = app.add_subcommand("analyze", "Certified length and rate from a counts record");
    analyze->add_option("--counts", an_counts, "Counts record (JSON)")->required()->check(CLI::ExistingFile);
    analyze->add_flag("--use-phi", an_use_phi, "Use the record's phi_z_bar instead of bounding it");
    analyze->add_option("--bound", an_bound, "Sampling bound: kl_chernoff or closed_form");
    analyze->add_flag("--asymptotic", an_asymptotic, "Infinite-data limit");
    analyze->add_option("--out", an_out, "Report path (default stdout)");

    // rate-curve
    ModelOptions rc_model;
    std::string rc_sweep = "intensity";
    double rc_mu_min = 4.0;
    double rc_mu_max = 20.0;
    int rc_points = 161;
    std::vector<double> rc_losses = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double rc_fixed_mu = 9.6;
    std::vector<int> rc_dims = {2, 4, 8, 16};
    std::string rc_out;
    auto *rate_curve = app.add_subcommand("rate-curve", "Model sweep to CSV (intensity, loss or dimension)");
    rc_model.add_to(*rate_curve);
    rate_curve->add_option("--sweep", rc_sweep, "intensity, loss or dimension")
        ->check(CLI::IsMember({"intensity", "loss", "dimension"}));
    rate_curve->add_option("--mu-min", rc_mu_min, "Intensity sweep start");
    rate_curve->add_option("--mu-max", rc_mu_max, "Intensity sweep end");
    rate_curve->add_option("--points", rc_points, "Intensity sweep points");
    rate_curve->add_option("--losses", rc_losses, "Extra channel losses in dB")->delimiter(',');
    rate_curve->add_option("--fixed-mu", rc_fixed_mu, "Intensity held fixed in the loss sweep");
    rate_curve->add_option("--dims", rc_dims, "Dimensions for the dimension sweep")->delimiter(',');
    rate_curve->add_option("--out", rc_out, "CSV path (default stdout)");

    // optimize
    ModelOptions op_model;
    bool op_fix_px = false;
    std::string op_out;
    auto *optimize = app.add_subcommand("optimize", "Maximize R over intensity and test probability");
    op_model.add_to(*optimize);
    optimize->add_flag("--fix-p-x", op_fix_px, "Optimize intensity only, at --p-x");
    optimize->add_option("--out", op_out, "Report path (default stdout)");

    // attack-demo
    std::optional<std::uint64_t> ad_seed;
    std::string ad_strategy = "unbalanced";
    double ad_rounds = 1e6;
    int ad_d = 2;
    std::vector<double> ad_thresholds;
    double ad_fraction = 1.0;
    double ad_p_d = 0.0;
    double ad_px_aware = 0.5;
    double ad_px_legacy = 0.01;
    std::optional<double> ad_intensity;
    std::optional<double> ad_q;
    std::string ad_out;
    auto *attack = app.add_subcommand("attack-demo", "Run one blinding attack against both treatments");
    attack->add_option("--seed", ad_seed, "Master seed (required)")->required();
    attack->add_option("--strategy", ad_strategy, "balanced, unbalanced or d_dimensional")
        ->check(CLI::IsMember({"balanced", "unbalanced", "d_dimensional"}));
    attack->add_option("--rounds", ad_rounds, "Rounds per session");
    attack->add_option("--d", ad_d, "Number of outcomes");
    attack->add_option("--thresholds", ad_thresholds,
                       "Blinding thresholds per detector (d_dimensional: trailing entries may be omitted)")->delimiter(',');
    attack->add_option("--fraction", ad_fraction, "Share of rounds attacked");
    attack->add_option("--p-d", ad_p_d, "Dark-count probability");
    attack->add_option("--p-x-aware", ad_px_aware, "Test probability for the blinding-aware session");
    attack->add_option("--p-x-legacy", ad_px_legacy, "Test probability for the legacy session");
    attack->add_option("--intensity", ad_intensity, "Attack intensity (default: window midpoint)");
    attack->add_option("--q", ad_q, "Basis incompatibility (default log2 d)");
    attack->add_option("--out", ad_out, "Report path (default stdout)");

    // extract
    std::string ex_raw;
    std::optional<std::size_t> ex_raw_bits;
    std::string ex_report;
    std::optional<std::size_t> ex_length;
    std::optional<std::uint64_t> ex_seed;
    std::string ex_seed_file;
    std::string ex_out;
    auto *extract = app.add_subcommand("extract", "Toeplitz-hash raw bits down to the certified length");
    extract->add_option("--raw", ex_raw, "Raw bit file")->required()->check(CLI::ExistingFile);
    extract->add_option("--raw-bits", ex_raw_bits, "Number of raw bits to use (default: raw_bits from the report, else the whole file)");
    auto *report_opt = extract->add_option("--report", ex_report, "Analysis report JSON giving 'length'");
    auto *length_opt = extract->add_option("--length", ex_length, "Output length in bits");
    report_opt->excludes(length_opt);
    auto *seed_opt = extract->add_option("--seed", ex_seed, "Seed for the Toeplitz matrix bits");
    auto *seed_file_opt = extract->add_option("--seed-file", ex_seed_file, "File holding the Toeplitz seed bits");
    seed_opt->excludes(seed_file_opt);
    extract->add_option("--out", ex_out, "Output bit file")->required();

    // test-battery
    std::string tb_input;
    siqrng::stats::BatteryConfig tb_config;
    std::string tb_json;
    auto *battery = app.add_subcommand("test-battery", "Statistical test battery on a bit file");
    battery->add_option("--input", tb_input, "Bit file")->required()->check(CLI::ExistingFile);
    battery->add_option("--count", tb_config.count, "Number of sequences");
    battery->add_option("--length", tb_config.length, "Bits per sequence");
    battery->add_option("--alpha", tb_config.alpha, "Significance level");
    battery->add_option("--json", tb_json, "Also write the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (*simulate) {
        siqrng::io::SessionConfig cfg = siqrng::io::load_session_config(sim_config);
        cfg.protocol.seed = *sim_seed;
        if (sim_rounds) {
            cfg.protocol.rounds = parse_count(*sim_rounds, "--rounds");
        }
        const siqrng::TallySummary tally = siqrng::run_session(cfg.protocol, cfg.source, cfg.bank);
        Json out;
        out["seed"] = *sim_seed;
        out["treatment"] = std::string(siqrng::to_string(cfg.protocol.treatment));
        out["tallies"] = siqrng::io::to_json(tally);
        try {
            out["analysis"] = siqrng::io::to_json(siqrng::key_length(tally, cfg.security, cfg.protocol.treatment));
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::insufficient_test_data && e.kind() != ErrorKind::no_extractable_rounds) {
                throw;
            }
            out["analysis"] = {{"length", 0}, {"R", 0.0}, {"refused", e.what()}};
        }
        if (!sim_raw_out.empty()) {
            const siqrng::BitString raw = siqrng::raw_bits(tally, cfg.protocol.dimension);
            siqrng::write_bit_file(sim_raw_out, raw);
            out["raw_bits"] = raw.size();
        }
        if (!sim_counts_out.empty()) {
            emit(siqrng::io::to_json(siqrng::io::record_from_tally(tally, cfg.protocol.treatment, cfg.security,
                                                                   "simulated"))
                     .dump(2),
                 sim_counts_out);
        }
        emit(out.dump(2), sim_out);
        return 0;
    }

    if (*analyze) {
        const siqrng::io::CountsRecord record = siqrng::io::ingest_counts(an_counts);
        for (const auto &w : record.warnings) {
            std::cerr << "warning: " << w << '\n';
        }
        siqrng::SecurityParams base;
        base.bound = siqrng::parse_sampling_bound(an_bound);
        base.asymptotic = an_asymptotic;
        const auto mode = an_use_phi ? siqrng::io::PhaseMode::from_record : siqrng::io::PhaseMode::computed;
        const siqrng::AnalysisReport report = siqrng::io::analyze_record(record, mode, base);
        Json out;
        out["label"] = record.label;
        out["analysis"] = siqrng::io::to_json(report);
        if (record.rate_reported) {
            out["R_reported"] = *record.rate_reported;
            out["R_difference"] = report.rate - *record.rate_reported;
        }
        out["warnings"] = record.warnings;
        emit(out.dump(2), an_out);
        return 0;
    }

    if (*rate_curve) {
        const siqrng::ChannelModel model = rc_model.model();
        const siqrng::SecurityParams sec = rc_model.security();
        std::string csv;
        if (rc_sweep == "intensity") {
            csv = siqrng::io::intensity_csv(siqrng::intensity_curve(model, rc_model.rounds, rc_model.test_probability(),
                                                                    sec, linear_points(rc_mu_min, rc_mu_max, rc_points)));
        } else if (rc_sweep == "loss") {
            csv = siqrng::io::loss_csv(siqrng::loss_curve(model, rc_model.rounds, rc_model.test_probability(), sec,
                                                          rc_fixed_mu, rc_losses));
        } else {
            csv = siqrng::io::dimension_csv(siqrng::dimension_curve(model, rc_dims, rc_model.rounds, sec));
        }
        emit(csv, rc_out);
        return 0;
    }

    if (*optimize) {
        const siqrng::ChannelModel model = op_model.model();
        const siqrng::SecurityParams sec = op_model.security();
        const siqrng::OptimumPoint best =
            op_fix_px ? siqrng::optimize_intensity(model, op_model.rounds, op_model.test_probability(), sec,
                                                   siqrng::Treatment::blinding_aware)
                      : siqrng::optimize_params(model, op_model.rounds, sec, siqrng::Treatment::blinding_aware);
        Json out;
        out["d"] = model.dimension;
        out["N"] = op_model.rounds;
        out["asymptotic"] = sec.asymptotic;
        out["mu_optimal"] = best.mu;
        out["p_x_optimal"] = best.p_x;
        out["R_optimal"] = best.rate;
        emit(out.dump(2), op_out);
        return 0;
    }

    if (*attack) {
        siqrng::AttackDemoParams p;
        p.rounds = parse_count(ad_rounds, "--rounds");
        p.dimension = ad_d;
        p.dark_count = ad_p_d;
        p.seed = *ad_seed;
        p.attack.strategy = siqrng::parse_attack_strategy(ad_strategy);
        if (ad_thresholds.empty()) {
            // Defaults: equal thresholds for balanced, guessed detector lowest otherwise.
            for (int i = 0; i < ad_d; ++i) {
                ad_thresholds.push_back(p.attack.strategy == siqrng::AttackStrategy::balanced ? 1.0 : 1.0 + i);
            }
        }
        if (p.attack.strategy == siqrng::AttackStrategy::d_dimensional) {
            // Trailing thresholds left out are filled like JSON nulls.
            while (static_cast<int>(ad_thresholds.size()) < ad_d) {
                ad_thresholds.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        p.attack.thresholds = ad_thresholds;
        p.attack.attack_fraction = ad_fraction;
        p.attack.intensity = ad_intensity;
        p.security = siqrng::SecurityParams::ideal(ad_d);
        if (ad_q) {
            p.security.q = *ad_q;
        }
        p.variants = {{siqrng::Treatment::blinding_aware, ad_px_aware}, {siqrng::Treatment::legacy_squash, ad_px_legacy}};
        const auto window = siqrng::feasible_intensity_window(p.attack, ad_d);
        const auto outcomes = siqrng::run_attack_demo(p);

        Json out;
        out["strategy"] = ad_strategy;
        out["rounds"] = p.rounds;
        out["window"] = {{"lo", window.lo}, {"hi", window.hi}};
        out["intensity"] = siqrng::attack_intensity(p.attack, ad_d);
        Json rows = Json::array();
        std::fprintf(stderr, "%-16s %8s %12s %14s %10s %12s\n", "treatment", "p_x", "X error", "length", "R",
                     "Eve agrees");
        for (const auto &o : outcomes) {
            Json row;
            row["treatment"] = std::string(siqrng::to_string(o.treatment));
            row["p_x"] = o.p_x;
            row["tallies"] = siqrng::io::to_json(o.tally);
            if (o.report) {
                row["analysis"] = siqrng::io::to_json(*o.report);
            } else {
                row["analysis"] = {{"length", 0}, {"R", 0.0}, {"refused", o.refusal->what()}};
            }
            row["target_agreement"] = o.target_agreement;
            rows.push_back(row);
            std::fprintf(stderr, "%-16s %8.4f %12.6f %14llu %10.6f %12.6f\n",
                         std::string(siqrng::to_string(o.treatment)).c_str(), o.p_x, o.tally.x_error_rate(),
                         static_cast<unsigned long long>(o.length()), o.report ? o.report->rate : 0.0,
                         o.target_agreement);
        }
        out["sessions"] = rows;
        emit(out.dump(2), ad_out);
        return 0;
    }

    if (*extract) {
        siqrng::AnalysisReport report;
        std::optional<std::size_t> raw_count = ex_raw_bits;
        if (!ex_report.empty()) {
            const Json j = siqrng::io::read_json_file(ex_report);
            const Json &analysis = j.contains("analysis") ? j.at("analysis") : j;
            report.length = siqrng::io::detail::get_count(analysis, "report", "length");
            // Reports from `simulate` carry the exact raw length; bit files are byte-padded.
            if (!raw_count && j.contains("raw_bits")) {
                raw_count = siqrng::io::detail::get_count(j, "report", "raw_bits");
            }
        } else {
            siqrng::require(ex_length.has_value(), ErrorKind::invalid_argument, "give --report or --length");
            report.length = *ex_length;
        }
        siqrng::BitString raw = siqrng::read_bit_file(ex_raw);
        if (raw_count) {
            siqrng::require(*raw_count <= raw.size(), ErrorKind::invalid_argument,
                            "raw bit count exceeds the bits in the file");
            raw = raw.slice(0, *raw_count);
        }
        siqrng::ToeplitzSpec spec;
        if (!ex_seed_file.empty()) {
            spec = siqrng::plan_extraction(report, raw.size(), siqrng::read_bit_file(ex_seed_file));
        } else {
            siqrng::require(ex_seed.has_value(), ErrorKind::invalid_argument, "give --seed or --seed-file");
            siqrng::RandomStream stream(*ex_seed);
            spec = siqrng::plan_extraction(report, raw.size(), stream);
        }
        const siqrng::BitString out = siqrng::extract(raw, spec);
        siqrng::write_bit_file(ex_out, out);
        std::cerr << "extracted " << out.size() << " bits from " << raw.size() << " raw bits\n";
        return 0;
    }

    if (*battery) {
        const siqrng::BitString bits = siqrng::read_bit_file(tb_input);
        const auto report = siqrng::stats::run_battery(bits, tb_config);
        std::cout << siqrng::io::battery_table(report);
        if (!tb_json.empty()) {
            siqrng::io::write_text_file(tb_json, siqrng::io::to_json(report).dump(2));
        }
        return report.all_pass() ? 0 : 1;
    }
    return kExitUsage;
}

}  // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
