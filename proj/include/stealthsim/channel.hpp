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

// MIMO propagation model between gNB sectors and terminals (UE or
// eavesdropper).
//
// The model is a deliberately compact stand-in for a full geometry-based
// stochastic channel: six rank-1 clusters per link, one of which is the LOS
// ray (Rice factor 10 dB), exponential excess delays (mean 100 ns), and
// Laplacian azimuth spread (10 deg std) around the geometric angles at both
// ends.  It preserves the properties the detectability results actually
// depend on — spatial selectivity at the gNB array, frequency selectivity
// across the SSB band, TDD reciprocity, and a hard sector pattern — at a
// small fraction of the cost of a full drop-based model.
//
// Conventions:
//   * 2D geometry, gNB at the origin; heights are folded into the path-loss
//     and never appear explicitly (elevation angles are 0).
//   * draw_channel returns the UPLINK channel: H[n] is (gNB ports) x
//     (terminal ports).  downlink_of transposes it (TDD reciprocity).
//   * Path loss is folded into H: E[ ||H[n]||_F^2 ] = PL_lin * M * K for a
//     boresight terminal (the sector pattern additionally attenuates
//     off-boresight departure rays, and is exactly zero behind the sector
//     plane).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stealthsim/common.hpp"
#include "stealthsim/rng.hpp"

namespace stealthsim {

/// Uniform planar array with optional cross-polarized port pairs.
struct ArrayGeometry {
    int rows = 1;
    int cols = 1;
    int pols = 1;           ///< 1 or 2 polarization ports per element
    double spacing = 0.5;   ///< element pitch in wavelengths

    int ports() const { return rows * cols * pols; }

    void validate() const {
        if (rows < 1 || cols < 1 || (pols != 1 && pols != 2))
            throw std::invalid_argument("ArrayGeometry: rows/cols >= 1, pols in {1,2}");
    }
};

/// One cell drop: a three-sector gNB at the origin plus terminal positions.
struct DropGeometry {
    std::array<double, 3> sector_boresight_rad{0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0};
    double ue_x = 0.0, ue_y = 0.0;    ///< meters
    double eve_x = 0.0, eve_y = 0.0;  ///< meters
    double ue_heading_rad = 0.0;      ///< terminal array broadside direction
    double eve_heading_rad = 0.0;
    double min_radius_m = 10.0;
    double max_radius_m = 100.0;

    void validate() const {
        for (auto [x, y] : {std::pair{ue_x, ue_y}, std::pair{eve_x, eve_y}}) {
            const double d = std::hypot(x, y);
            if (d < min_radius_m - 1e-9 || d > max_radius_m + 1e-9)
                throw std::domain_error(
                    "DropGeometry: terminal distance " + std::to_string(d) +
                    " m outside [" + std::to_string(min_radius_m) + ", " +
                    std::to_string(max_radius_m) + "] m");
        }
    }
};

enum class Terminal { kUe, kEve };

/// Stochastic model knobs (defaults match the simulated deployment).
struct ChannelParams {
    double fc_ghz = 3.5;             ///< carrier frequency
    double scs_hz = 30'000.0;        ///< subcarrier spacing for the delay phase ramp
    int n_clusters = 6;              ///< LOS + (n_clusters-1) NLOS rays
    double rice_factor_db = 10.0;    ///< LOS-to-NLOS power ratio
    double delay_spread_s = 100e-9;  ///< mean of the exponential excess delays
    double angle_spread_deg = 10.0;  ///< std of the Laplacian azimuth offsets
};

/// One resolved ray of a realization (gain excludes path loss).  Angles and
/// polarization phasors are side-based — the sector side and the terminal
/// side — because a physical ray is the same in both link directions.
struct ClusterRay {
    double delay_s = 0.0;
    double aod_rad = 0.0;  ///< sector-side azimuth relative to the boresight
    double aoa_rad = 0.0;  ///< terminal-side azimuth relative to the heading
    cd gain{0.0, 0.0};     ///< includes Rice weighting and sector pattern
    std::array<cd, 2> pol_tx{cd{1.0, 0.0}, cd{1.0, 0.0}};  ///< sector side
    std::array<cd, 2> pol_rx{cd{1.0, 0.0}, cd{1.0, 0.0}};  ///< terminal side
};

/// Frequency-domain channel of one sector-terminal link.
struct ChannelRealization {
    std::vector<Eigen::MatrixXcd> h;  ///< per-subcarrier, (gNB ports) x (terminal ports)
    double pathloss_db = 0.0;
    std::vector<ClusterRay> clusters;

    int n_subcarriers() const { return static_cast<int>(h.size()); }
};

/// Phase response of a uniform planar array toward (azimuth, elevation),
/// relative to broadside.  Port index p*(rows*cols) + r*cols + c; the two
/// polarization ports duplicate the spatial phase (per-cluster polarization
/// phasing is applied by draw_channel, not here).  Every entry has unit
/// modulus; boresight gives the all-ones vector.
inline Eigen::VectorXcd steering_vector(const ArrayGeometry& arr, double azimuth_rad,
                                        double elevation_rad) {
    arr.validate();
    if (!std::isfinite(azimuth_rad) || !std::isfinite(elevation_rad))
        throw std::invalid_argument("steering_vector: angles must be finite");
    Eigen::VectorXcd v(arr.ports());
    const double kx = 2.0 * kPi * arr.spacing * std::sin(azimuth_rad) * std::cos(elevation_rad);
    const double ky = 2.0 * kPi * arr.spacing * std::sin(elevation_rad);
    const int spatial = arr.rows * arr.cols;
    for (int r = 0; r < arr.rows; ++r)
        for (int c = 0; c < arr.cols; ++c) {
            const cd e = std::polar(1.0, c * kx + r * ky);
            for (int p = 0; p < arr.pols; ++p) v(p * spatial + r * arr.cols + c) = e;
        }
    return v;
}

/// Street-canyon LOS path loss: 32.4 + 21*log10(d_m) + 20*log10(fc_GHz) dB.
inline double pathloss_db(double d_m, double fc_ghz) {
    if (!(d_m >= 1.0))
        throw std::domain_error("pathloss_db: distance must be >= 1 m, got " +
                                std::to_string(d_m));
    return 32.4 + 21.0 * std::log10(d_m) + 20.0 * std::log10(fc_ghz);
}

/// Exponent q such that cos(az)^q has its half-power points at +/-35 deg
/// (70 deg half-power beamwidth).
inline constexpr double kSectorHalfPowerDeg = 35.0;

inline double sector_pattern_exponent() {
    static const double q =
        std::log(0.5) / std::log(std::cos(deg_to_rad(kSectorHalfPowerDeg)));
    return q;
}

/// Power gain of the sector pattern at `az_rad` off boresight: cos(az)^q in
/// the front half-plane and exactly zero at and beyond +/-90 deg.  The hard
/// back-plane cutoff models the sector reflector; it means a terminal behind
/// a sector receives nothing from it rather than a tiny backlobe.
inline double sector_pattern_power(double az_rad) {
    const double a = std::abs(wrap_angle(az_rad));
    if (a >= kPi / 2.0) return 0.0;
    return std::pow(std::cos(a), sector_pattern_exponent());
}

namespace detail {

/// Zero-mean Laplacian sample with standard deviation `std_dev`.
inline double laplacian(Rng& rng, double std_dev) {
    const double b = std_dev / std::sqrt(2.0);  // scale parameter
    double u = rng.uniform() - 0.5;
    // u == -0.5 would need log(0); nudge inside the open interval.
    if (u <= -0.5) u = -0.5 + 1e-16;
    return (u < 0.0) ? b * std::log1p(2.0 * u) : -b * std::log1p(-2.0 * u);
}

/// Exponential sample with the given mean (mean 0 returns exactly 0).
inline double exponential(Rng& rng, double mean) {
    if (mean == 0.0) return 0.0;
    double u = rng.uniform();
    if (u >= 1.0) u = 1.0 - 1e-16;
    return -mean * std::log1p(-u);
}

}  // namespace detail

/// Draws the uplink channel between `sector` of the gNB and `terminal`.
///
/// Cluster 0 is the LOS ray at the geometric azimuth with excess delay 0 and
/// deterministic magnitude (Rice factor splits the power LOS vs NLOS; with
/// n_clusters == 1 the LOS ray carries all of it).  NLOS rays get
/// exponential delays, Laplacian angle offsets at both ends, and complex
/// Gaussian gains.  Each ray is rank-1 across ports:
///     H_l = gain_l * (pol_tx_l ⊗ a_spatial) (pol_rx_l ⊗ b_spatial)^H
/// with unit-modulus polarization phasors, so the LOS-only channel stays
/// rank 1.  The sector pattern weights each ray's departure azimuth, and
/// sqrt(PL_lin) scales the whole realization.
///
/// Draw order from `rng` is fixed and documented by the implementation so
/// realizations are bit-reproducible for a given seed.
inline ChannelRealization draw_channel(const DropGeometry& geom, int sector,
                                       Terminal terminal, const ArrayGeometry& arr_tx,
                                       const ArrayGeometry& arr_rx, int n_subcarriers,
                                       Rng& rng, const ChannelParams& params = {}) {
    if (sector < 0 || sector > 2)
        throw std::invalid_argument("draw_channel: sector must be 0, 1, or 2");
    if (n_subcarriers < 1)
        throw std::invalid_argument("draw_channel: need at least one subcarrier");
    if (params.n_clusters < 1)
        throw std::invalid_argument("draw_channel: need at least one cluster");
    arr_tx.validate();
    arr_rx.validate();

    const double tx = (terminal == Terminal::kUe) ? geom.ue_x : geom.eve_x;
    const double ty = (terminal == Terminal::kUe) ? geom.ue_y : geom.eve_y;
    const double heading =
        (terminal == Terminal::kUe) ? geom.ue_heading_rad : geom.eve_heading_rad;

    const double d_m = std::hypot(tx, ty);
    const double az_geo = std::atan2(ty, tx);
    const double los_aod = wrap_angle(az_geo - geom.sector_boresight_rad[sector]);
    const double los_aoa = wrap_angle(az_geo + kPi - heading);

    ChannelRealization out;
    out.pathloss_db = pathloss_db(d_m, params.fc_ghz);
    const double pl_amp = std::sqrt(db_to_lin(-out.pathloss_db));

    const int n_clusters = params.n_clusters;
    const double k_lin = db_to_lin(params.rice_factor_db);
    const double los_power = (n_clusters > 1) ? k_lin / (1.0 + k_lin) : 1.0;
    const double nlos_power =
        (n_clusters > 1) ? (1.0 / (1.0 + k_lin)) / (n_clusters - 1) : 0.0;

    out.clusters.resize(n_clusters);
    for (int l = 0; l < n_clusters; ++l) {
        auto& cl = out.clusters[l];
        if (l == 0) {
            cl.delay_s = 0.0;
            cl.aod_rad = los_aod;
            cl.aoa_rad = los_aoa;
            cl.gain = std::polar(std::sqrt(los_power), rng.uniform(0.0, 2.0 * kPi));
        } else {
            cl.delay_s = detail::exponential(rng, params.delay_spread_s);
            cl.aod_rad = wrap_angle(los_aod + detail::laplacian(rng, deg_to_rad(params.angle_spread_deg)));
            cl.aoa_rad = wrap_angle(los_aoa + detail::laplacian(rng, deg_to_rad(params.angle_spread_deg)));
            cl.gain = rng.cgaussian(nlos_power);
        }
        for (auto& p : cl.pol_tx) p = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
        for (auto& p : cl.pol_rx) p = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
        cl.gain *= std::sqrt(sector_pattern_power(cl.aod_rad));
    }

    const int spatial_tx = arr_tx.rows * arr_tx.cols;
    const int spatial_rx = arr_rx.rows * arr_rx.cols;
    const int m = arr_tx.ports(), k = arr_rx.ports();

    out.h.assign(static_cast<std::size_t>(n_subcarriers), Eigen::MatrixXcd::Zero(m, k));
    Eigen::VectorXcd a(m), b(k);
    for (const auto& cl : out.clusters) {
        if (cl.gain == cd{0.0, 0.0}) continue;
        a = steering_vector(arr_tx, cl.aod_rad, 0.0);
        b = steering_vector(arr_rx, cl.aoa_rad, 0.0);
        for (int p = 0; p < arr_tx.pols; ++p)
            a.segment(p * spatial_tx, spatial_tx) *= cl.pol_tx[static_cast<std::size_t>(p)];
        for (int p = 0; p < arr_rx.pols; ++p)
            b.segment(p * spatial_rx, spatial_rx) *= cl.pol_rx[static_cast<std::size_t>(p)];

        const Eigen::MatrixXcd outer = (pl_amp * cl.gain) * (a * b.adjoint());
        const double phase_step = -2.0 * kPi * params.scs_hz * cl.delay_s;
        for (int n = 0; n < n_subcarriers; ++n)
            out.h[static_cast<std::size_t>(n)].noalias() +=
                std::polar(1.0, phase_step * n) * outer;
    }
    return out;
}

/// TDD reciprocity: the downlink channel is the per-subcarrier transpose of
/// the uplink channel.  The ray list is carried over unchanged (it is
/// side-based, not direction-based).  Applying the operation twice returns
/// the original realization.
inline ChannelRealization downlink_of(const ChannelRealization& ul) {
    ChannelRealization dl;
    dl.pathloss_db = ul.pathloss_db;
    dl.clusters = ul.clusters;
    dl.h.reserve(ul.h.size());
    for (const auto& m : ul.h) dl.h.push_back(m.transpose());
    return dl;
}

}  // namespace stealthsim
