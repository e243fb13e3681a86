// SPDX-License-Identifier: Apache-2.0
//
// stealthsim — link-level simulator for 5G NR downlink synchronization
// detectability under directional beam management.
//
// Copyright 2026 the stealthsim authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Monte Carlo campaign orchestration.
//
// A trial drops a UE and an eavesdropper in a three-sector cell, draws the
// six uplink channels (3 sectors x 2 terminals), transmits one SSB burst
// window in one of two modes, synthesizes the received sample streams under
// both hypotheses (H1: burst sent, H0: gNB silent), and runs the detectors:
//
//   * baseline — every sector sweeps the full 8-beam Case B burst through
//     its grid-of-beams codebook (24 SSB transmissions per period);
//   * csi      — the gNB measures per-sector uplink RSRP, picks the serving
//     sector, builds a spatial covariance (genie: from the true channel;
//     ls: from least-squares pilot estimates) and sends a single
//     eigen-beamformed SSB from that sector only.
//
// Power bookkeeping is in linear milliwatts throughout (dBm-friendly).  The
// channel matrices already carry the path loss amplitude, so the transmit-
// side per-subcarrier scale comes from link_budget at zero path loss.
//
// Determinism: every random decision in a trial draws from a fixed fork of
// the trial's root generator (geometry, channels, payloads, noise, detector
// phase each get their own stream), so a trial's result is a pure function
// of (config, seed, trial index), campaigns are schedule-independent under
// any thread count, and the baseline/csi modes of the same seed share
// identical drops, channels, and H0 noise.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "stealthsim/beamforming.hpp"
#include "stealthsim/channel.hpp"
#include "stealthsim/common.hpp"
#include "stealthsim/detection.hpp"
#include "stealthsim/nr_sync.hpp"
#include "stealthsim/ofdm.hpp"
#include "stealthsim/rng.hpp"

namespace stealthsim {

enum class Mode { kBaseline, kCsi };
enum class CsiSource { kGenie, kLs };

inline std::string to_string(Mode m) { return m == Mode::kBaseline ? "baseline" : "csi"; }
inline std::string to_string(CsiSource s) { return s == CsiSource::kGenie ? "genie" : "ls"; }

/// Campaign parameters.  Defaults reproduce the 16-port deployment; the
/// 128-port variant pairs the 8x8x2 array with 19 dBm transmit power.
struct ScenarioConfig {
    int n_sectors = 3;
    double sector_width_deg = 120.0;
    ArrayGeometry gnb_array{4, 2, 2};
    ArrayGeometry ue_array{2, 1, 2};
    ArrayGeometry eve_array{2, 1, 2};
    double scs_hz = 30'000.0;
    double fc_ghz = 3.5;
    double sample_rate_hz = 15.36e6;  ///< eavesdropper capture bandwidth
    double ssb_period_ms = 20.0;
    double eve_obs_time_ms = 25.0;
    double tx_power_dbm = 28.0;     ///< total DL power across the SSB band
    double ul_tx_power_dbm = 23.0;  ///< terminal sounding power (config-only)
    double noise_figure_db = 7.0;
    int ssb_subcarrier_offset = 136;  ///< SSB grid start within the 512-bin band
    Mode mode = Mode::kBaseline;
    CsiSource csi_source = CsiSource::kGenie;
    bool detect_energy = true;      ///< run the eavesdropper energy detector
    bool detect_correlator = true;  ///< run the eavesdropper blind correlator
    int n_trials = 200;
    std::uint64_t seed = 1;
    /// Test hook: pin the drop instead of drawing it.
    std::optional<DropGeometry> forced_drop;

    /// Transmit power paired with an array size (28 dBm for 16 ports,
    /// 19 dBm for 128 ports).
    static double default_tx_power_dbm(const ArrayGeometry& arr) {
        return arr.ports() >= 128 ? 19.0 : 28.0;
    }

    int n_observation_samples() const {
        return static_cast<int>(std::llround(eve_obs_time_ms * 1e-3 * sample_rate_hz));
    }

    void validate() const {
        gnb_array.validate();
        ue_array.validate();
        eve_array.validate();
        const int m = gnb_array.ports();
        if (m != 16 && m != 128)
            throw std::invalid_argument(
                "ScenarioConfig: gNB array must be 4x2x2 (16 ports) or 8x8x2 (128 "
                "ports), got " +
                std::to_string(m) + " ports");
        if (n_sectors != 3)
            throw std::invalid_argument("ScenarioConfig: the deployment is three-sector");
        // One period plus the burst half-frame must fit in the observation
        // window so a full burst is always captured.
        const double burst_ms = 5.0;
        if (eve_obs_time_ms + 1e-9 < ssb_period_ms + burst_ms)
            throw std::invalid_argument(
                "ScenarioConfig: observation window must cover ssb_period + burst (" +
                std::to_string(ssb_period_ms + burst_ms) + " ms)");
        if (n_trials < 1)
            throw std::invalid_argument("ScenarioConfig: n_trials must be >= 1");
        if (!(std::isfinite(tx_power_dbm) && std::isfinite(noise_figure_db) &&
              std::isfinite(ul_tx_power_dbm)))
            throw std::invalid_argument("ScenarioConfig: powers must be finite");
        if (ssb_subcarrier_offset < 0 || ssb_subcarrier_offset + kSsbSubcarriers > 512)
            throw std::invalid_argument("ScenarioConfig: SSB placement out of band");
    }
};

/// Link-budget quantities in linear milliwatts.
struct LinkBudget {
    double rx_power_dbm = 0.0;    ///< total received signal power
    double re_scale = 0.0;        ///< amplitude per occupied subcarrier
    double noise_variance = 0.0;  ///< per-sample complex noise power
};

/// Thermal-noise and signal-scale bookkeeping: noise variance per sample is
/// kT (-174 dBm/Hz) + NF + 10 log10(rate); the signal scale spreads the
/// received power uniformly over the SSB's 240 occupied subcarriers.
inline LinkBudget link_budget(double tx_power_dbm, double pathloss_db,
                              double noise_figure_db, double bandwidth_hz) {
    if (!(std::isfinite(tx_power_dbm) && std::isfinite(pathloss_db) &&
          std::isfinite(noise_figure_db)) ||
        !(bandwidth_hz > 0.0))
        throw std::invalid_argument("link_budget: inputs must be finite, bandwidth > 0");
    LinkBudget out;
    out.rx_power_dbm = tx_power_dbm - pathloss_db;
    const double noise_dbm =
        kThermalNoiseDbmHz + noise_figure_db + 10.0 * std::log10(bandwidth_hz);
    out.noise_variance = dbm_to_mw(noise_dbm);
    out.re_scale = std::sqrt(dbm_to_mw(out.rx_power_dbm) / kSsbSubcarriers);
    return out;
}

/// Uplink RSRP in dBm: eta * mean_n ||H[n]||_F^2 / (M*K), floored at
/// -250 dBm so a zero channel stays finite.
inline double compute_ul_rsrp(const std::vector<Eigen::MatrixXcd>& h, double eta) {
    if (h.empty()) throw std::invalid_argument("compute_ul_rsrp: empty channel");
    const double mk = static_cast<double>(h[0].rows() * h[0].cols());
    double acc = 0.0;
    for (const auto& hn : h) acc += hn.squaredNorm();
    const double lin = eta * acc / (static_cast<double>(h.size()) * mk);
    constexpr double kFloorDbm = -250.0;
    if (!(lin > dbm_to_mw(kFloorDbm))) return kFloorDbm;
    return mw_to_dbm(lin);
}

inline double compute_ul_rsrp(const ChannelRealization& h, double eta) {
    return compute_ul_rsrp(h.h, eta);
}

/// One SSB transmission within the burst window.
struct SsbTransmission {
    int sector = 0;
    int start_symbol = 4;  ///< Case B position within the burst half-frame
    Precoder precoder;
    SsbGrid ssb;
};

/// Everything a single Monte Carlo trial produces.
struct TrialResult {
    double ue_stat_h1 = 0.0;
    double ue_stat_h0 = 0.0;
    double eve_energy_h1 = 0.0;
    double eve_energy_h0 = 0.0;
    double eve_corr_h1 = 0.0;
    double eve_corr_h0 = 0.0;
    DropGeometry drop;
    int selected_sector = -1;  ///< csi mode; -1 when every sector transmits
    std::string precoder_label;
    int n_transmissions = 0;
    long long burst_t0 = 0;  ///< burst window start sample within the capture
};

namespace detail {

/// Superimpose every transmission, as seen through this terminal's
/// per-sector uplink channels (DL = transpose by reciprocity), onto a noisy
/// capture of `n_samples` per receive port.  An empty transmission list
/// yields the H0 (noise-only) stream.  Noise is drawn port-major so the
/// stream is a deterministic function of the rng state.
inline DetectorStream synthesize_rx(const std::vector<SsbTransmission>& txs,
                                    const std::array<ChannelRealization, 3>& ul_by_sector,
                                    const LinkBudget& budget, long long burst_t0,
                                    int n_samples, const Numerology& num,
                                    int ssb_subcarrier_offset, Rng& noise_rng) {
    const int k_ports = static_cast<int>(ul_by_sector[0].h[0].cols());
    DetectorStream stream(static_cast<std::size_t>(k_ports),
                          std::vector<cf>(static_cast<std::size_t>(n_samples)));

    for (const auto& tx : txs) {
        const auto& ul = ul_by_sector[static_cast<std::size_t>(tx.sector)];
        if (ul.n_subcarriers() < kSsbSubcarriers)
            throw std::invalid_argument("synthesize_rx: channel narrower than the SSB");
        // Effective DL response per receive port r and SSB row n:
        // g_r[n] = (H_ul[n]^T p)_r — reciprocity without a transpose copy.
        Eigen::MatrixXcd g(kSsbSubcarriers, k_ports);
        for (int n = 0; n < kSsbSubcarriers; ++n)
            g.row(n) = (ul.h[static_cast<std::size_t>(n)].transpose() * tx.precoder.p)
                           .transpose();
        for (int r = 0; r < k_ports; ++r) {
            ResourceGrid rx_grid(kSsbSubcarriers, kSsbSymbols);
            for (int c = 0; c < kSsbSymbols; ++c)
                for (int n = 0; n < kSsbSubcarriers; ++n)
                    rx_grid(n, c) = budget.re_scale * g(n, r) * tx.ssb.grid(n, c);
            const auto wave = modulate(rx_grid, ssb_subcarrier_offset, num, tx.start_symbol);
            const long long at = burst_t0 + wave.t0;
            auto& ch = stream[static_cast<std::size_t>(r)];
            for (std::size_t i = 0; i < wave.channels[0].size(); ++i)
                ch[static_cast<std::size_t>(at) + i] +=
                    static_cast<cf>(wave.channels[0][i]);
        }
    }

    for (auto& ch : stream)
        for (auto& v : ch) v += static_cast<cf>(noise_rng.cgaussian(budget.noise_variance));
    return stream;
}

/// Per-sector cell identities: distinct PCIs, one n_id_2 per sector.
inline CellIdentity sector_cell(int sector) { return CellIdentity{112 * sector, sector}; }

/// Trial rng stream ids, one per random decision class.
enum ForkId : std::uint64_t {
    kForkGeometry = 0,
    kForkChannels = 1,
    kForkPayloadBaseline = 2,
    kForkPayloadCsi = 3,
    kForkNoiseH0 = 4,
    kForkNoiseH1Baseline = 5,
    kForkNoiseH1Csi = 6,
    kForkDetector = 7,
    kForkUplink = 8,
};

}  // namespace detail

/// Optional per-trial capture of the synthesized receive streams (one
/// vector per antenna port), for debug dumps.  Copying the streams costs
/// tens of megabytes, so campaigns pass nullptr.
struct TrialCapture {
    DetectorStream ue_h1;
    DetectorStream eve_h1;
};

/// Runs one trial.  `trial_rng` is the trial's root generator (campaigns
/// derive it from (seed, trial index)); all randomness forks off it.
inline TrialResult run_trial(const ScenarioConfig& cfg, Rng trial_rng,
                             TrialCapture* capture = nullptr) {
    cfg.validate();
    const Numerology num{static_cast<int>(cfg.scs_hz), 512,
                         static_cast<int>(cfg.sample_rate_hz), 44, 36};
    num.validate();
    const int n_samples = cfg.n_observation_samples();
    const int half_frame = num.samples_per_subframe() * 5;

    TrialResult result;

    // (1) Geometry and burst timing.
    auto geo_rng = trial_rng.fork(detail::kForkGeometry);
    if (cfg.forced_drop) {
        result.drop = *cfg.forced_drop;
    } else {
        geo_rng.disc_point(result.drop.min_radius_m, result.drop.max_radius_m,
                           result.drop.ue_x, result.drop.ue_y);
        result.drop.ue_heading_rad = geo_rng.uniform(0.0, 2.0 * kPi);
        geo_rng.disc_point(result.drop.min_radius_m, result.drop.max_radius_m,
                           result.drop.eve_x, result.drop.eve_y);
        result.drop.eve_heading_rad = geo_rng.uniform(0.0, 2.0 * kPi);
    }
    result.drop.validate();
    result.burst_t0 = geo_rng.uniform_int(0, n_samples - half_frame);

    // (2) Six uplink channels, fixed draw order.
    ChannelParams params;
    params.fc_ghz = cfg.fc_ghz;
    params.scs_hz = cfg.scs_hz;
    auto chan_rng = trial_rng.fork(detail::kForkChannels);
    std::array<ChannelRealization, 3> ch_ue, ch_eve;
    for (int s = 0; s < 3; ++s) {
        ch_ue[static_cast<std::size_t>(s)] =
            draw_channel(result.drop, s, Terminal::kUe, cfg.gnb_array, cfg.ue_array,
                         kSsbSubcarriers, chan_rng, params);
        ch_eve[static_cast<std::size_t>(s)] =
            draw_channel(result.drop, s, Terminal::kEve, cfg.gnb_array, cfg.eve_array,
                         kSsbSubcarriers, chan_rng, params);
    }

    const LinkBudget budget =
        link_budget(cfg.tx_power_dbm, 0.0, cfg.noise_figure_db, cfg.sample_rate_hz);

    // (3) Build the transmission list for the mode.
    std::vector<SsbTransmission> txs;
    if (cfg.mode == Mode::kBaseline) {
        auto payload_rng = trial_rng.fork(detail::kForkPayloadBaseline);
        const auto schedule = build_burst_schedule(SsbPattern::kCaseB, 8);
        const auto beams = gob_codebook(cfg.gnb_array, cfg.sector_width_deg, 8);
        for (int s = 0; s < 3; ++s)
            for (int b = 0; b < 8; ++b)
                txs.push_back(SsbTransmission{
                    s, schedule.ssb_start_symbols[static_cast<std::size_t>(b)],
                    beams[static_cast<std::size_t>(b)],
                    build_ssb_grid(detail::sector_cell(s), payload_rng)});
        result.selected_sector = -1;
        result.precoder_label = "gob-sweep";
    } else {
        auto ul_rng = trial_rng.fork(detail::kForkUplink);
        UplinkPilotConfig ul_cfg;
        ul_cfg.eta = dbm_to_mw(cfg.ul_tx_power_dbm) / kSsbSubcarriers;
        ul_cfg.pilot = make_dft_pilot(cfg.ue_array.ports());
        ul_cfg.n_subcarriers = kSsbSubcarriers;
        ul_cfg.noise_variance = budget.noise_variance;

        std::array<double, 3> rsrp_dbm{};
        std::array<std::vector<Eigen::MatrixXcd>, 3> basis;
        for (int s = 0; s < 3; ++s) {
            const auto& ul = ch_ue[static_cast<std::size_t>(s)];
            if (cfg.csi_source == CsiSource::kGenie) {
                basis[static_cast<std::size_t>(s)] = ul.h;
            } else {
                const auto y = receive_ul_pilot(ul, ul_cfg, ul_rng);
                basis[static_cast<std::size_t>(s)] = ls_estimate(y, ul_cfg);
            }
            rsrp_dbm[static_cast<std::size_t>(s)] =
                compute_ul_rsrp(basis[static_cast<std::size_t>(s)], ul_cfg.eta);
        }
        const int best = select_sector(rsrp_dbm);
        const auto cov = spatial_covariance(basis[static_cast<std::size_t>(best)]);
        auto payload_rng = trial_rng.fork(detail::kForkPayloadCsi);
        txs.push_back(SsbTransmission{best, 4, eigen_precoder(cov),
                                      build_ssb_grid(detail::sector_cell(best), payload_rng)});
        result.selected_sector = best;
        result.precoder_label = txs[0].precoder.label;
    }
    result.n_transmissions = static_cast<int>(txs.size());

    // (4) Receive streams: H1 with the burst, H0 with the gNB silent.  The
    // H0 noise fork is mode-independent, so baseline and csi runs of the
    // same seed share bit-identical H0 captures.
    auto h0_rng = trial_rng.fork(detail::kForkNoiseH0);
    auto h1_rng = trial_rng.fork(cfg.mode == Mode::kBaseline
                                     ? detail::kForkNoiseH1Baseline
                                     : detail::kForkNoiseH1Csi);
    const auto ue_h0 = detail::synthesize_rx({}, ch_ue, budget, result.burst_t0,
                                             n_samples, num, cfg.ssb_subcarrier_offset,
                                             h0_rng);
    const auto eve_h0 = detail::synthesize_rx({}, ch_eve, budget, result.burst_t0,
                                              n_samples, num, cfg.ssb_subcarrier_offset,
                                              h0_rng);
    const auto ue_h1 = detail::synthesize_rx(txs, ch_ue, budget, result.burst_t0,
                                             n_samples, num, cfg.ssb_subcarrier_offset,
                                             h1_rng);
    const auto eve_h1 = detail::synthesize_rx(txs, ch_eve, budget, result.burst_t0,
                                              n_samples, num, cfg.ssb_subcarrier_offset,
                                              h1_rng);
    if (capture) {
        capture->ue_h1 = ue_h1;
        capture->eve_h1 = eve_h1;
    }

    // (5) Detection statistics.
    auto det_rng = trial_rng.fork(detail::kForkDetector);
    const EnergyWindowSpec energy_spec;
    const int energy_start =
        static_cast<int>(det_rng.uniform_int(0, energy_spec.hop_samples - 1));

    result.ue_stat_h1 = ue_correlator_statistic(ue_h1, cfg.ssb_subcarrier_offset, num,
                                                budget.noise_variance);
    result.ue_stat_h0 = ue_correlator_statistic(ue_h0, cfg.ssb_subcarrier_offset, num,
                                                budget.noise_variance);
    if (cfg.detect_energy) {
        result.eve_energy_h1 = energy_statistic(eve_h1, energy_spec, num, energy_start);
        result.eve_energy_h0 = energy_statistic(eve_h0, energy_spec, num, energy_start);
    }
    if (cfg.detect_correlator) {
        const auto blind = CorrelatorSearchSpec::full_band(num.fft_size);
        result.eve_corr_h1 =
            correlator_statistic(eve_h1, blind, num, budget.noise_variance);
        result.eve_corr_h0 =
            correlator_statistic(eve_h0, blind, num, budget.noise_variance);
    }
    return result;
}

/// Key for one ROC curve of a campaign.
struct RocKey {
    std::string observer;  ///< "ue" or "eve"
    std::string detector;  ///< "correlator" or "energy"
    std::string mode;      ///< "baseline" or "csi"

    bool operator<(const RocKey& o) const {
        return std::tie(observer, detector, mode) < std::tie(o.observer, o.detector, o.mode);
    }
    bool operator==(const RocKey& o) const {
        return observer == o.observer && detector == o.detector && mode == o.mode;
    }
};

struct CampaignResult {
    std::vector<TrialResult> trials;         ///< ordered by trial index
    std::map<RocKey, RocCurve> curves;       ///< pooled over all trials
};

namespace detail {

/// Worker count: STEALTHSIM_THREADS if set, else 1 (single-threaded is the
/// reference execution; any count produces identical results).
inline int campaign_thread_count() {
    if (const char* env = std::getenv("STEALTHSIM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

}  // namespace detail

/// Runs cfg.n_trials independent trials (parallelized over
/// STEALTHSIM_THREADS workers) and pools statistics into per-detector ROC
/// curves.  Results are byte-identical for any worker count because trial i
/// depends only on (cfg, seed, i) and pooling is ordered by trial index.
inline CampaignResult run_campaign(const ScenarioConfig& cfg) {
    cfg.validate();
    if (cfg.n_trials < 2)
        throw std::invalid_argument("run_campaign: need at least 2 trials");

    CampaignResult out;
    out.trials.resize(static_cast<std::size_t>(cfg.n_trials));

    const int n_workers =
        std::min(detail::campaign_thread_count(), cfg.n_trials);
    std::atomic<int> next{0};
    auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.n_trials) return;
            out.trials[static_cast<std::size_t>(i)] =
                run_trial(cfg, Rng::for_trial(cfg.seed, static_cast<std::uint64_t>(i)));
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    const std::string mode = to_string(cfg.mode);
    auto pool_curve = [&](const std::string& observer, const std::string& detector,
                          auto h0_of, auto h1_of) {
        std::vector<double> h0, h1;
        h0.reserve(out.trials.size());
        h1.reserve(out.trials.size());
        for (const auto& t : out.trials) {
            h0.push_back(h0_of(t));
            h1.push_back(h1_of(t));
        }
        out.curves[RocKey{observer, detector, mode}] = roc_curve(h0, h1);
    };
    pool_curve("ue", "correlator", [](const TrialResult& t) { return t.ue_stat_h0; },
               [](const TrialResult& t) { return t.ue_stat_h1; });
    if (cfg.detect_energy)
        pool_curve("eve", "energy", [](const TrialResult& t) { return t.eve_energy_h0; },
                   [](const TrialResult& t) { return t.eve_energy_h1; });
    if (cfg.detect_correlator)
        pool_curve("eve", "correlator", [](const TrialResult& t) { return t.eve_corr_h0; },
                   [](const TrialResult& t) { return t.eve_corr_h1; });
    return out;
}

}  // namespace stealthsim
