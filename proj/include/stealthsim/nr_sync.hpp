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

// Synchronization-signal layer: PSS/SSS sequence generators (TS 38.211
// §7.4.2), SS/PBCH block resource-grid assembly, and the FR1 Case B burst
// schedule (TS 38.213 §4.1).  Everything here is pure and deterministic
// given an explicit RNG, so it is safe to call concurrently from workers.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealthsim/common.hpp"
#include "stealthsim/rng.hpp"

namespace stealthsim {

/// Length of the PSS and SSS sequences in resource elements.
inline constexpr int kSyncSeqLen = 127;
/// SS/PBCH block dimensions: 240 subcarriers (20 RBs) by 4 OFDM symbols.
inline constexpr int kSsbSubcarriers = 240;
inline constexpr int kSsbSymbols = 4;
/// First subcarrier (row) of the PSS/SSS within the 240-subcarrier block.
inline constexpr int kSyncFirstRow = 56;
/// OFDM symbols per 5 ms half-frame at 30 kHz subcarrier spacing.
inline constexpr int kSymbolsPerHalfFrame = 140;

/// Physical cell identity, decomposed as pci = 3*n_id_1 + n_id_2.
struct CellIdentity {
    int n_id_1 = 0;  ///< cell identity group, 0..335
    int n_id_2 = 0;  ///< identity within the group, 0..2

    int pci() const { return 3 * n_id_1 + n_id_2; }

    static CellIdentity from_pci(int pci) {
        if (pci < 0 || pci > 1007)
            throw std::domain_error("CellIdentity: pci must be in [0, 1007], got " +
                                    std::to_string(pci));
        return CellIdentity{pci / 3, pci % 3};
    }

    void validate() const {
        if (n_id_1 < 0 || n_id_1 > 335)
            throw std::domain_error("CellIdentity: n_id_1 must be in [0, 335], got " +
                                    std::to_string(n_id_1));
        if (n_id_2 < 0 || n_id_2 > 2)
            throw std::domain_error("CellIdentity: n_id_2 must be in {0, 1, 2}, got " +
                                    std::to_string(n_id_2));
    }
};

namespace detail {

/// Binary m-sequence x(i+7) = (x(i+tap) + x(i)) mod 2 over GF(2), length 127.
/// `seed` holds x(0..6) in natural index order.
inline std::array<int, kSyncSeqLen> m_sequence(const std::array<int, 7>& seed, int tap) {
    std::array<int, kSyncSeqLen> x{};
    for (int i = 0; i < 7; ++i) x[i] = seed[i];
    for (int i = 0; i + 7 < kSyncSeqLen; ++i) x[i + 7] = (x[i + tap] + x[i]) % 2;
    return x;
}

}  // namespace detail

/// Primary synchronization signal: BPSK m-sequence d(n) = 1 - 2*x((n + 43*n_id_2) mod 127)
/// with x(i+7) = (x(i+4) + x(i)) mod 2 seeded x(6..0) = 1110110.
/// gen_pss(k) is gen_pss(0) cyclically advanced by 43*k.
inline std::vector<double> gen_pss(int n_id_2) {
    if (n_id_2 < 0 || n_id_2 > 2)
        throw std::domain_error("gen_pss: n_id_2 must be in {0, 1, 2}, got " +
                                std::to_string(n_id_2));
    const auto x = detail::m_sequence({0, 1, 1, 0, 1, 1, 1}, 4);
    std::vector<double> d(kSyncSeqLen);
    for (int n = 0; n < kSyncSeqLen; ++n)
        d[n] = 1.0 - 2.0 * x[(n + 43 * n_id_2) % kSyncSeqLen];
    return d;
}

/// Secondary synchronization signal: Gold sequence
///   d(n) = (1 - 2*x0((n + m0) mod 127)) * (1 - 2*x1((n + m1) mod 127)),
///   m0 = 15*floor(n_id_1/112) + 5*n_id_2,  m1 = n_id_1 mod 112,
/// with x0 tapped at (i+4, i), x1 at (i+1, i), both seeded x(6..0) = 0000001.
inline std::vector<double> gen_sss(const CellIdentity& cell) {
    cell.validate();
    const int m0 = 15 * (cell.n_id_1 / 112) + 5 * cell.n_id_2;
    const int m1 = cell.n_id_1 % 112;
    const auto x0 = detail::m_sequence({1, 0, 0, 0, 0, 0, 0}, 4);
    const auto x1 = detail::m_sequence({1, 0, 0, 0, 0, 0, 0}, 1);
    std::vector<double> d(kSyncSeqLen);
    for (int n = 0; n < kSyncSeqLen; ++n)
        d[n] = (1.0 - 2.0 * x0[(n + m0) % kSyncSeqLen]) *
               (1.0 - 2.0 * x1[(n + m1) % kSyncSeqLen]);
    return d;
}

/// One SS/PBCH block: a 240 x 4 resource grid plus the identity it encodes.
///
/// Layout (rows = subcarriers, columns = OFDM symbols):
///   symbol 0: PSS on rows 56..182, zero elsewhere
///   symbol 1: PBCH on all 240 rows
///   symbol 2: SSS on rows 56..182, PBCH on rows 0..47 and 192..239
///   symbol 3: PBCH on all 240 rows
/// Total occupied resource elements: 127 + 240 + (127 + 96) + 240 = 830.
struct SsbGrid {
    ResourceGrid grid;
    CellIdentity cell;
};

/// Assembles an SS/PBCH block for `cell`.  PBCH resource elements (data and
/// DMRS alike) carry i.i.d. unit-power QPSK filler drawn from `rng`: the
/// detectors studied here exploit energy and PSS/SSS structure only, so MIB
/// payload semantics are irrelevant.  Per-RE average power on occupied REs
/// is exactly 1.
inline SsbGrid build_ssb_grid(const CellIdentity& cell, Rng& rng) {
    cell.validate();
    SsbGrid ssb;
    ssb.cell = cell;
    ssb.grid = ResourceGrid::Zero(kSsbSubcarriers, kSsbSymbols);

    const auto pss = gen_pss(cell.n_id_2);
    const auto sss = gen_sss(cell);
    for (int n = 0; n < kSyncSeqLen; ++n) {
        ssb.grid(kSyncFirstRow + n, 0) = pss[n];
        ssb.grid(kSyncFirstRow + n, 2) = sss[n];
    }
    for (int r = 0; r < kSsbSubcarriers; ++r) ssb.grid(r, 1) = rng.qpsk();
    for (int r = 0; r < 48; ++r) ssb.grid(r, 2) = rng.qpsk();
    for (int r = 192; r < kSsbSubcarriers; ++r) ssb.grid(r, 2) = rng.qpsk();
    for (int r = 0; r < kSsbSubcarriers; ++r) ssb.grid(r, 3) = rng.qpsk();
    return ssb;
}

/// SSB-burst timing within one burst period.
struct BurstSchedule {
    std::vector<int> ssb_start_symbols;  ///< first symbol of each SSB in the half-frame
    double period_ms = 20.0;             ///< burst repetition period
    int n_beams = 8;                     ///< SSBs per burst (one per beam)
};

/// Supported SSB time-domain patterns.
enum class SsbPattern {
    kCaseB,  ///< 30 kHz SCS, candidate symbols {4,8,16,20} + 28*n
};

/// Burst schedule for the FR1 Case B configuration at 3.5 GHz (L_max = 8):
/// start symbols {4,8,16,20} + 28*n for n in {0,1}, 20 ms period.  The burst
/// occupies the first 5 ms half-frame of each period; the rest is silent.
inline BurstSchedule build_burst_schedule(SsbPattern pattern, int n_beams = 8) {
    if (pattern != SsbPattern::kCaseB)
        throw std::invalid_argument("build_burst_schedule: unsupported SSB pattern");
    if (n_beams != 4 && n_beams != 8)
        throw std::invalid_argument(
            "build_burst_schedule: Case B supports 4 or 8 beams, got " +
            std::to_string(n_beams));
    BurstSchedule sched;
    sched.n_beams = n_beams;
    sched.period_ms = 20.0;
    for (int n = 0; n < n_beams / 4; ++n)
        for (int base : {4, 8, 16, 20})
            sched.ssb_start_symbols.push_back(base + 28 * n);
    return sched;
}

}  // namespace stealthsim
