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

// Uplink pilot reception, least-squares channel estimation, spatial
// covariance, and the two downlink precoding strategies compared by the
// simulator:
//
//   * eigen: p = conj(u1), u1 the principal eigenvector of the wideband
//     spatial covariance R = (1/N) sum_n Hhat[n] Hhat[n]^H, computed by a
//     safeguarded power iteration;
//   * grid-of-beams (GoB): conjugated steering vectors at 8 fixed azimuths
//     spanning the 120 deg sector.
//
// Power convention: precoders are unit-norm and the configured transmit
// power is total across ports, so eigen and GoB modes radiate the same
// total power and differ only in its spatial distribution.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stealthsim/channel.hpp"
#include "stealthsim/common.hpp"
#include "stealthsim/rng.hpp"

namespace stealthsim {

/// Uplink sounding configuration.  The same unitary pilot matrix is applied
/// on every subcarrier (any unitary choice cancels exactly in the LS step).
struct UplinkPilotConfig {
    /// Per-subcarrier UL transmit power, linear milliwatts (default: a
    /// 23 dBm handset transmission spread over the 240-subcarrier band).
    double eta = 0.8314;
    Eigen::MatrixXcd pilot;         ///< K x K unitary S
    int n_subcarriers = 240;
    double noise_variance = 0.0;    ///< per-element noise power, linear milliwatts

    void validate() const {
        if (pilot.rows() != pilot.cols() || pilot.rows() < 1)
            throw std::invalid_argument("UplinkPilotConfig: pilot must be square");
        const Eigen::MatrixXcd gram = pilot.adjoint() * pilot;
        const Eigen::MatrixXcd eye =
            Eigen::MatrixXcd::Identity(pilot.rows(), pilot.cols());
        if ((gram - eye).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("UplinkPilotConfig: pilot is not unitary");
        if (n_subcarriers < 1)
            throw std::invalid_argument("UplinkPilotConfig: n_subcarriers must be >= 1");
        if (noise_variance < 0.0)
            throw std::invalid_argument("UplinkPilotConfig: negative noise variance");
        if (eta < 0.0)
            throw std::invalid_argument("UplinkPilotConfig: negative transmit power");
    }
};

/// K x K unitary DFT matrix, S(j,k) = exp(-2*pi*i*j*k/K) / sqrt(K).
inline Eigen::MatrixXcd make_dft_pilot(int k) {
    if (k < 1) throw std::invalid_argument("make_dft_pilot: K must be >= 1");
    Eigen::MatrixXcd s(k, k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (int j = 0; j < k; ++j)
        for (int c = 0; c < k; ++c)
            s(j, c) = scale * std::polar(1.0, -2.0 * kPi * j * c / k);
    return s;
}

/// Unit-norm downlink precoder.
struct Precoder {
    Eigen::VectorXcd p;
    std::string label;
};

/// Wideband spatial covariance at the gNB array.
struct SpatialCovariance {
    Eigen::MatrixXcd r;
};

/// Uplink pilot reception: Y[n] = sqrt(eta) * H[n] * S + W[n] with W entries
/// i.i.d. circular complex Gaussian of the configured variance.  Noise is
/// drawn column-major per subcarrier in ascending n, which fixes the rng
/// consumption order for reproducibility.
inline std::vector<Eigen::MatrixXcd> receive_ul_pilot(const ChannelRealization& h,
                                                      const UplinkPilotConfig& cfg,
                                                      Rng& rng) {
    cfg.validate();
    if (h.h.empty()) throw std::invalid_argument("receive_ul_pilot: empty channel");
    if (h.n_subcarriers() != cfg.n_subcarriers)
        throw std::invalid_argument("receive_ul_pilot: channel has " +
                                    std::to_string(h.n_subcarriers()) +
                                    " subcarriers, config expects " +
                                    std::to_string(cfg.n_subcarriers));
    if (h.h[0].cols() != cfg.pilot.rows())
        throw std::invalid_argument("receive_ul_pilot: channel has " +
                                    std::to_string(h.h[0].cols()) +
                                    " terminal ports, pilot is " +
                                    std::to_string(cfg.pilot.rows()) + "x" +
                                    std::to_string(cfg.pilot.cols()));

    const double amp = std::sqrt(cfg.eta);
    std::vector<Eigen::MatrixXcd> y;
    y.reserve(h.h.size());
    for (const auto& hn : h.h) {
        Eigen::MatrixXcd yn = amp * (hn * cfg.pilot);
        if (cfg.noise_variance > 0.0)
            for (int c = 0; c < yn.cols(); ++c)
                for (int r = 0; r < yn.rows(); ++r)
                    yn(r, c) += rng.cgaussian(cfg.noise_variance);
        y.push_back(std::move(yn));
    }
    return y;
}

/// Least-squares channel estimate: Hhat[n] = (1/sqrt(eta)) * Y[n] * S^H,
/// which equals H[n] + (1/sqrt(eta)) * W[n] * S^H.
inline std::vector<Eigen::MatrixXcd> ls_estimate(const std::vector<Eigen::MatrixXcd>& y,
                                                 const UplinkPilotConfig& cfg) {
    if (cfg.eta <= 0.0)
        throw std::domain_error("ls_estimate: eta must be positive, got " +
                                std::to_string(cfg.eta));
    const double inv_amp = 1.0 / std::sqrt(cfg.eta);
    const Eigen::MatrixXcd s_h = cfg.pilot.adjoint();
    std::vector<Eigen::MatrixXcd> hhat;
    hhat.reserve(y.size());
    for (const auto& yn : y) hhat.push_back(inv_amp * (yn * s_h));
    return hhat;
}

/// R = (1/N) * sum_n Hhat[n] Hhat[n]^H — Hermitian PSD by construction.
inline SpatialCovariance spatial_covariance(const std::vector<Eigen::MatrixXcd>& hhat) {
    if (hhat.empty())
        throw std::invalid_argument("spatial_covariance: need at least one estimate");
    const auto m = hhat[0].rows();
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, m);
    for (const auto& hn : hhat) {
        if (hn.rows() != m)
            throw std::invalid_argument("spatial_covariance: inconsistent row counts");
        r.noalias() += hn * hn.adjoint();
    }
    r /= static_cast<double>(hhat.size());
    // Remove the numeric skew so downstream consumers see an exactly
    // Hermitian matrix regardless of accumulation order.
    r = 0.5 * (r + r.adjoint()).eval();
    return SpatialCovariance{std::move(r)};
}

/// Principal eigenvector of a Hermitian PSD matrix by safeguarded power
/// iteration.
///
///   * start: first canonical basis vector (deterministic);
///   * convergence: ||R u - lambda u|| <= tol * lambda;
///   * safeguard: lambda1 >= max_j R_jj for Hermitian PSD matrices, so a
///     "converged" candidate below the largest diagonal entry has stalled on
///     a non-dominant eigenvector (e.g. diag(1,3) from e1) and the iteration
///     restarts from a random vector;
///   * phase: largest-magnitude entry made real nonnegative (ties by lowest
///     index), so the returned direction is unique.
///
/// `rng` seeds safeguard restarts; when omitted a fixed-seed generator keeps
/// the routine fully deterministic.  Near-degenerate spectra converge slowly
/// and may exhaust max_iter, which raises with the iteration count.
inline Eigen::VectorXcd principal_eigvec(const SpatialCovariance& cov, double tol = 1e-9,
                                         int max_iter = 1000, Rng* rng = nullptr) {
    const Eigen::MatrixXcd& r = cov.r;
    if (r.rows() != r.cols() || r.rows() < 1)
        throw std::invalid_argument("principal_eigvec: matrix must be square");
    const double scale = r.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        throw std::domain_error("principal_eigvec: zero covariance matrix");

    double max_diag = 0.0;
    for (int i = 0; i < r.rows(); ++i) max_diag = std::max(max_diag, r(i, i).real());

    Rng fallback(0x5eed5eedULL);
    Rng& restarts = rng ? *rng : fallback;

    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(r.rows());
    u(0) = 1.0;
    int used_restarts = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXcd ru = r * u;
        const double lambda = std::real(u.dot(ru));  // Eigen dot conjugates u
        const double residual = (ru - lambda * u).norm();
        const bool stalled = ru.norm() < 1e-300;
        if (!stalled && residual <= tol * lambda) {
            if (lambda >= max_diag * (1.0 - 1e-12)) {
                // Converged to the dominant eigenvector; canonicalize phase.
                int imax = 0;
                for (int i = 1; i < u.size(); ++i)
                    if (std::abs(u(i)) > std::abs(u(imax))) imax = i;
                const double mag = std::abs(u(imax));
                if (mag > 0.0) u *= std::conj(u(imax)) / mag;
                return u;
            }
            // Spurious fixed point below the known lower bound on lambda1.
        } else if (!stalled) {
            u = ru / ru.norm();
            continue;
        }
        // Restart from a random direction (stalled or spurious convergence).
        if (++used_restarts > 8)
            throw std::runtime_error(
                "principal_eigvec: exceeded restart budget after " +
                std::to_string(iter + 1) + " iterations");
        for (int i = 0; i < u.size(); ++i) u(i) = restarts.cgaussian();
        u.normalize();
    }
    throw std::runtime_error("principal_eigvec: no convergence after " +
                             std::to_string(max_iter) + " iterations");
}

/// Eigen-mode precoder p = conj(u1).
inline Precoder eigen_precoder(const SpatialCovariance& cov, double tol = 1e-9,
                               int max_iter = 1000, Rng* rng = nullptr) {
    Eigen::VectorXcd u1 = principal_eigvec(cov, tol, max_iter, rng);
    return Precoder{u1.conjugate(), "eigen"};
}

/// Grid-of-beams codebook: `n_beams` conjugated steering vectors at azimuths
/// uniformly covering [-sector_width/2, +sector_width/2] (beam centers at the
/// bin midpoints: +/-7.5, +/-22.5, +/-37.5, +/-52.5 deg for the defaults),
/// fixed 0 deg elevation, each scaled to unit norm.
inline std::vector<Precoder> gob_codebook(const ArrayGeometry& arr,
                                          double sector_width_deg = 120.0,
                                          int n_beams = 8) {
    if (n_beams < 1) throw std::invalid_argument("gob_codebook: n_beams must be >= 1");
    arr.validate();
    std::vector<Precoder> beams;
    beams.reserve(static_cast<std::size_t>(n_beams));
    const double step = sector_width_deg / n_beams;
    const double scale = 1.0 / std::sqrt(static_cast<double>(arr.ports()));
    for (int k = 0; k < n_beams; ++k) {
        const double az_deg = -sector_width_deg / 2.0 + (k + 0.5) * step;
        Eigen::VectorXcd p =
            scale * steering_vector(arr, deg_to_rad(az_deg), 0.0).conjugate();
        beams.push_back(Precoder{std::move(p), "gob" + std::to_string(k)});
    }
    return beams;
}

/// Index of the serving sector: argmax RSRP, ties to the lowest index.
inline int select_sector(const std::array<double, 3>& ul_rsrp_dbm) {
    int best = 0;
    for (int s = 0; s < 3; ++s) {
        if (std::isnan(ul_rsrp_dbm[static_cast<std::size_t>(s)]))
            throw std::invalid_argument("select_sector: RSRP for sector " +
                                        std::to_string(s) + " is NaN");
        if (ul_rsrp_dbm[static_cast<std::size_t>(s)] >
            ul_rsrp_dbm[static_cast<std::size_t>(best)])
            best = s;
    }
    return best;
}

}  // namespace stealthsim
