// SPDX-License-Identifier: Apache-2.0
//
// stealthsim — link-level simulator for 5G NR downlink synchronization
// detectability under directional beam management
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stealthsim {

using cd = std::complex<double>;
using cf = std::complex<float>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Boltzmann thermal noise density at 290 K, dBm/Hz.
inline constexpr double kThermalNoiseDbmHz = -174.0;

/// dB <-> linear power ratio.
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

/// dBm <-> watt.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

/// Complex resource grid, rows = subcarriers, columns = OFDM symbols.
using ResourceGrid = Eigen::MatrixXcd;

/// One multi-antenna baseband capture. `channels[a]` holds the samples of
/// antenna port `a`; all ports share the sample rate and the start time `t0`
/// (in samples since an arbitrary epoch).
struct SampleStream {
    std::vector<std::vector<cd>> channels;
    double rate_hz = 0.0;
    long long t0 = 0;

    std::size_t n_channels() const { return channels.size(); }
    std::size_t n_samples() const { return channels.empty() ? 0 : channels[0].size(); }
};

/// Detector-facing capture: single precision, split per antenna.
using DetectorStream = std::vector<std::vector<cf>>;

}  // namespace stealthsim
