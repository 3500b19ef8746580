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
#include <functional>
#include <vector>

#include "siqrng/detector.hpp"
#include "siqrng/error.hpp"
#include "siqrng/security.hpp"

namespace siqrng {

/// Coherent-state source seen through a lossy channel and threshold detectors.
struct ChannelModel {
    double mu = 1.0;            // mean photon number at the source
    double eta = 1.0;           // total transmittance including detector efficiency
    double dark_count = 0.0;
    double misalignment = 0.004;
    int dimension = 2;

    double effective_mu() const { return mu * eta; }

    ChannelModel with_mu(double value) const {
        ChannelModel m = *this;
        m.mu = value;
        return m;
    }

    /// Adds `loss_db` of channel attenuation on top of the current transmittance.
    ChannelModel with_extra_loss(double loss_db) const {
        ChannelModel m = *this;
        m.eta *= std::pow(10.0, -loss_db / 10.0);
        return m;
    }

    void validate() const {
        require(mu >= 0.0 && std::isfinite(mu), ErrorKind::invalid_argument, "mu must be finite and >= 0");
        require(eta >= 0.0 && eta <= 1.0, ErrorKind::invalid_argument, "eta outside [0, 1]");
        require(dark_count >= 0.0 && dark_count < 1.0, ErrorKind::invalid_argument, "p_d outside [0, 1)");
        require(misalignment >= 0.0 && misalignment < 1.0, ErrorKind::invalid_argument, "e_d outside [0, 1)");
        require(dimension >= 2 && dimension <= kMaxDimension, ErrorKind::invalid_argument,
                "dimension must be in [2, 64]");
    }
};

/// Calibration of the two-detector polarization setup: a per-detector Z
/// click rate of 4.15 MHz at 5 MHz repetition for mu = 9.17 fixes eta; the
/// dark count is the mean of 24 and 5 counts/s per 5 MHz gate.
struct ExperimentCalibration {
    static constexpr double repetition_hz = 5e6;
    static constexpr double click_rate_hz = 4.15e6;
    static constexpr double reference_mu = 9.17;
    static constexpr double p_x = 5e-4;
    static constexpr double rounds = 1e9;
    static constexpr double q = 0.954;
    static constexpr double eta_e = 0.9932;

    static ChannelModel model(double mu = reference_mu) {
        ChannelModel m;
        m.mu = mu;
        // Per-detector Z click probability 1 - exp(-mu eta / 2).
        m.eta = -2.0 * std::log(1.0 - click_rate_hz / repetition_hz) / reference_mu;
        m.dark_count = 0.5 * (24.0 + 5.0) / repetition_hz;
        m.misalignment = 0.004;
        m.dimension = 2;
        return m;
    }

    static SecurityParams security() {
        SecurityParams s;
        s.q = q;
        s.eta_e = eta_e;
        return s;
    }
};

struct PhotonYields {
    double x_correct = 0.0;  // single click on the correct X detector
    double z_single = 0.0;   // single click on one given Z detector
};

/// Yields for an n-photon input.
inline PhotonYields yields_photon_number(std::uint64_t n, const ChannelModel &model) {
    model.validate();
    const double d = model.dimension;
    const double keep = 1.0 - model.dark_count;
    const double lost_all = std::pow(1.0 - model.eta, static_cast<double>(n));
    PhotonYields y;
    y.x_correct = std::pow(keep, d - 1.0) - std::pow(keep, d) * lost_all;
    y.z_single = std::pow(keep, d - 1.0) *
                 (std::pow(1.0 - (d - 1.0) * model.eta / d, static_cast<double>(n)) - lost_all * keep);
    return y;
}

/// Correct-detector single-click gain in X.
inline double gain_x(const ChannelModel &m) {
    const double d = m.dimension;
    const double keep = 1.0 - m.dark_count;
    return std::pow(keep, d - 1.0) - std::pow(keep, d) * std::exp(-m.effective_mu());
}

/// Gain of single-click events (any detector) in Z.
inline double gain_z_single(const ChannelModel &m) {
    const double d = m.dimension;
    const double keep = 1.0 - m.dark_count;
    const double mp = m.effective_mu();
    return d * std::pow(keep, d - 1.0) * std::exp(-(d - 1.0) * mp / d) - d * std::pow(keep, d) * std::exp(-mp);
}

/// Expected counts; field meanings mirror TallySummary.
struct ExpectedTally {
    int dimension = 2;
    double rounds = 0.0;
    double x_rounds = 0.0;
    double z_rounds = 0.0;
    double x_correct = 0.0;
    double x_error = 0.0;
    double x_discarded = 0.0;
    double z_single = 0.0;
    double z_no_randomness = 0.0;
    double z_discarded = 0.0;
    double z_clicks_per_detector = 0.0;
    double z_single_per_detector = 0.0;

    double x_tested() const { return x_correct + x_error; }
    double z_clicked() const { return z_rounds - z_discarded; }
    double x_error_rate() const { return x_tested() > 0.0 ? x_error / x_tested() : 0.0; }
};

inline ExpectedTally expected_tallies_new(const ChannelModel &model, double rounds, double p_x) {
    model.validate();
    require(p_x > 0.0 && p_x < 1.0, ErrorKind::invalid_argument, "p_x must lie in (0, 1)");
    const double d = model.dimension;
    const double qx = gain_x(model);
    const double qz = gain_z_single(model);
    ExpectedTally t;
    t.dimension = model.dimension;
    t.rounds = rounds;
    t.x_rounds = rounds * p_x;
    t.z_rounds = rounds - t.x_rounds;
    t.x_error = t.x_rounds * (1.0 - qx + model.misalignment * qx);
    t.x_correct = t.x_rounds - t.x_error;
    t.z_single = t.z_rounds * qz;
    t.z_no_randomness = t.z_rounds - t.z_single;
    t.z_single_per_detector = t.z_single / d;
    t.z_clicks_per_detector = t.z_rounds * (1.0 - (1.0 - model.dark_count) * std::exp(-model.effective_mu() / d));
    return t;
}

/// Two-outcome squashing-model protocol; no-click rounds are discarded.
inline ExpectedTally expected_tallies_legacy(const ChannelModel &model, double rounds, double p_x) {
    model.validate();
    require(model.dimension == 2, ErrorKind::unsupported, "legacy protocol model is defined for d = 2 only");
    require(p_x > 0.0 && p_x < 1.0, ErrorKind::invalid_argument, "p_x must lie in (0, 1)");
    const double pd = model.dark_count;
    const double mp = model.effective_mu();
    const double q_click = 1.0 - (1.0 - pd) * (1.0 - pd) * std::exp(-mp);
    const double q_error = pd + model.misalignment * (q_click - pd);
    const double q_single = 2.0 * (1.0 - pd) * std::exp(-mp / 2.0) - 2.0 * (1.0 - pd) * (1.0 - pd) * std::exp(-mp);
    const double p_z = 1.0 - p_x;
    ExpectedTally t;
    t.dimension = 2;
    t.rounds = rounds;
    t.x_rounds = rounds * p_x;
    t.z_rounds = rounds * p_z;
    const double x_clicked = t.x_rounds * q_click;
    t.x_error = t.x_rounds * q_error;
    t.x_correct = x_clicked - t.x_error;
    t.x_discarded = t.x_rounds - x_clicked;
    const double z_clicked = t.z_rounds * q_click;
    t.z_single = t.z_rounds * q_single;
    t.z_no_randomness = z_clicked - t.z_single;
    t.z_discarded = t.z_rounds - z_clicked;
    t.z_single_per_detector = t.z_single / 2.0;
    t.z_clicks_per_detector = t.z_rounds * (1.0 - (1.0 - pd) * std::exp(-mp / 2.0));
    return t;
}

inline Evidence evidence_from_expected(const ExpectedTally &t, Treatment treatment) {
    Evidence e;
    e.dimension = t.dimension;
    e.rounds = t.rounds;
    e.x_rounds = t.x_rounds;
    e.test_rounds = t.x_tested();
    e.x_error_rate = t.x_error_rate();
    e.z_population = treatment == Treatment::legacy_squash ? t.z_clicked() : t.z_rounds;
    e.z_single = t.z_single;
    return e;
}

/// Report computed from closed-form expected tallies. Without any expected
/// single-click Z rounds the rate is zero.
inline AnalysisReport expected_rate(const ChannelModel &model, double rounds, double p_x, const SecurityParams &sec,
                                    Treatment treatment) {
    const ExpectedTally t = treatment == Treatment::legacy_squash ? expected_tallies_legacy(model, rounds, p_x)
                                                                  : expected_tallies_new(model, rounds, p_x);
    const Evidence ev = evidence_from_expected(t, treatment);
    if (ev.z_single < 1.0) {
        AnalysisReport r;
        r.treatment = treatment;
        r.bound = sec.bound;
        r.asymptotic = sec.asymptotic;
        r.rounds = rounds;
        r.e_x = ev.x_error_rate;
        r.phi_z_bar = (model.dimension - 1.0) / model.dimension;
        r.phase_saturated = true;
        r.entropy = std::log2(static_cast<double>(model.dimension));
        return r;
    }
    return key_length(ev, sec, treatment);
}

/// Rate for optimizers and sweeps: points too small to test anything count as zero.
inline double rate_or_zero(const ChannelModel &model, double rounds, double p_x, const SecurityParams &sec,
                           Treatment treatment) {
    try {
        return expected_rate(model, rounds, p_x, sec, treatment).rate;
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::insufficient_test_data || e.kind() == ErrorKind::no_extractable_rounds) {
            return 0.0;
        }
        throw;
    }
}

struct OptimumPoint {
    double mu = 0.0;
    double p_x = 0.0;
    double rate = 0.0;
};

struct OptimizerBounds {
    double mu_min = 1e-2;
    double mu_max = 100.0;
    double p_x_min = 1e-6;
    double p_x_max = 0.5;
    int grid = 50;
    double rel_tol = 1e-4;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
    }
    return out;
}

/// Golden-section maximization of f over [lo, hi] in log space. Returns the
/// best (x, f(x)) seen.
inline std::pair<double, double> golden_max_log(const std::function<double(double)> &f, double lo, double hi,
                                                double rel_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(lo);
    double b = std::log(hi);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(std::exp(c));
    double fd = f(std::exp(d));
    std::pair<double, double> best = fc >= fd ? std::pair{std::exp(c), fc} : std::pair{std::exp(d), fd};
    // Width in log space approximates the relative width.
    for (int it = 0; it < 200 && (b - a) > rel_tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(std::exp(c));
            if (fc > best.second) {
                best = {std::exp(c), fc};
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(std::exp(d));
            if (fd > best.second) {
                best = {std::exp(d), fd};
            }
        }
    }
    return best;
}

}  // namespace detail

/// Maximizes R over (mu, p_x): a log-spaced grid, then two alternating
/// passes of golden-section search per coordinate inside the neighbouring
/// grid cells. Grid ties resolve to the smallest mu, then smallest p_x.
inline OptimumPoint optimize_params(const ChannelModel &templ, double rounds, const SecurityParams &sec,
                                    Treatment treatment, const OptimizerBounds &bounds = {}) {
    templ.validate();
    const auto rate = [&](double mu, double p_x) { return rate_or_zero(templ.with_mu(mu), rounds, p_x, sec, treatment); };
    const auto mus = detail::log_grid(bounds.mu_min, bounds.mu_max, bounds.grid);
    const auto pxs = detail::log_grid(bounds.p_x_min, bounds.p_x_max, bounds.grid);

    OptimumPoint best{mus[0], pxs[0], rate(mus[0], pxs[0])};
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        for (std::size_t j = 0; j < pxs.size(); ++j) {
            const double r = rate(mus[i], pxs[j]);
            if (r > best.rate) {
                best = {mus[i], pxs[j], r};
                bi = i;
                bj = j;
            }
        }
    }
    if (best.rate <= 0.0) {
        return best;
    }

    double mu_lo = mus[bi == 0 ? 0 : bi - 1];
    double mu_hi = mus[std::min(bi + 1, mus.size() - 1)];
    double px_lo = pxs[bj == 0 ? 0 : bj - 1];
    double px_hi = pxs[std::min(bj + 1, pxs.size() - 1)];
    for (int pass = 0; pass < 2; ++pass) {
        const double p_x = best.p_x;
        auto [mu, r_mu] = detail::golden_max_log([&](double m) { return rate(m, p_x); }, mu_lo, mu_hi, bounds.rel_tol);
        if (r_mu > best.rate) {
            best = {mu, p_x, r_mu};
        }
        const double mu_fixed = best.mu;
        auto [px, r_px] =
            detail::golden_max_log([&](double p) { return rate(mu_fixed, p); }, px_lo, px_hi, bounds.rel_tol);
        if (r_px > best.rate) {
            best = {mu_fixed, px, r_px};
        }
    }
    return best;
}

/// Best mu at a fixed p_x (grid plus golden-section refinement).
inline OptimumPoint optimize_intensity(const ChannelModel &templ, double rounds, double p_x, const SecurityParams &sec,
                                       Treatment treatment, const OptimizerBounds &bounds = {}) {
    templ.validate();
    const auto rate = [&](double mu) { return rate_or_zero(templ.with_mu(mu), rounds, p_x, sec, treatment); };
    const auto mus = detail::log_grid(bounds.mu_min, bounds.mu_max, 4 * bounds.grid);
    OptimumPoint best{mus[0], p_x, rate(mus[0])};
    std::size_t bi = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        const double r = rate(mus[i]);
        if (r > best.rate) {
            best = {mus[i], p_x, r};
            bi = i;
        }
    }
    if (best.rate <= 0.0) {
        return best;
    }
    auto [mu, r] = detail::golden_max_log(rate, mus[bi == 0 ? 0 : bi - 1], mus[std::min(bi + 1, mus.size() - 1)],
                                          bounds.rel_tol);
    if (r > best.rate) {
        best = {mu, p_x, r};
    }
    return best;
}

struct IntensityPoint {
    double mu = 0.0;
    double effective_mu = 0.0;
    double rate = 0.0;
    double rate_legacy = 0.0;
    double e_x = 0.0;
    double phi_z_bar = 0.0;
};

/// R against source intensity at fixed p_x (both treatments when d = 2).
inline std::vector<IntensityPoint> intensity_curve(const ChannelModel &templ, double rounds, double p_x,
                                                   const SecurityParams &sec, const std::vector<double> &mus) {
    std::vector<IntensityPoint> out;
    for (double mu : mus) {
        const ChannelModel m = templ.with_mu(mu);
        IntensityPoint p;
        p.mu = mu;
        p.effective_mu = m.effective_mu();
        const AnalysisReport r = expected_rate(m, rounds, p_x, sec, Treatment::blinding_aware);
        p.rate = r.rate;
        p.e_x = r.e_x;
        p.phi_z_bar = r.phi_z_bar;
        if (m.dimension == 2) {
            p.rate_legacy = rate_or_zero(m, rounds, p_x, sec, Treatment::legacy_squash);
        }
        out.push_back(p);
    }
    return out;
}

struct LossPoint {
    double loss_db = 0.0;
    double mu_optimal = 0.0;
    double rate_optimal = 0.0;
    double rate_fixed = 0.0;
    double rate_legacy_fixed = 0.0;
};

/// R against extra channel loss: re-optimized intensity, a fixed intensity,
/// and the squashing-model protocol at that fixed intensity.
inline std::vector<LossPoint> loss_curve(const ChannelModel &templ, double rounds, double p_x,
                                         const SecurityParams &sec, double fixed_mu,
                                         const std::vector<double> &losses_db) {
    std::vector<LossPoint> out;
    for (double loss : losses_db) {
        const ChannelModel m = templ.with_extra_loss(loss);
        LossPoint p;
        p.loss_db = loss;
        const OptimumPoint opt = optimize_intensity(m, rounds, p_x, sec, Treatment::blinding_aware);
        p.mu_optimal = opt.mu;
        p.rate_optimal = opt.rate;
        p.rate_fixed = rate_or_zero(m.with_mu(fixed_mu), rounds, p_x, sec, Treatment::blinding_aware);
        if (m.dimension == 2) {
            p.rate_legacy_fixed = rate_or_zero(m.with_mu(fixed_mu), rounds, p_x, sec, Treatment::legacy_squash);
        }
        out.push_back(p);
    }
    return out;
}

struct DimensionPoint {
    int dimension = 2;
    double rounds = 0.0;
    bool asymptotic = false;
    OptimumPoint optimum;
};

/// Optimized R against dimension, with q = log2 d for each d.
inline std::vector<DimensionPoint> dimension_curve(const ChannelModel &templ, const std::vector<int> &dims,
                                                   double rounds, SecurityParams sec) {
    std::vector<DimensionPoint> out;
    for (int d : dims) {
        ChannelModel m = templ;
        m.dimension = d;
        SecurityParams s = sec;
        s.q = std::log2(static_cast<double>(d));
        out.push_back({d, rounds, sec.asymptotic, optimize_params(m, rounds, s, Treatment::blinding_aware)});
    }
    return out;
}

}  // namespace siqrng
