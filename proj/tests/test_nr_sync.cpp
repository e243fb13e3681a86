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

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stealthsim/nr_sync.hpp"
#include "stealthsim/rng.hpp"

using namespace stealthsim;

namespace {

// Conformance vectors produced by tests/golden/generate_golden.py, an
// independent Python implementation of the same LFSR definitions.
std::vector<std::vector<double>> load_sequences(const std::string& filename) {
    const std::string path = std::string(STEALTHSIM_TEST_DATA_DIR) + "/" + filename;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<double>> seqs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> seq;
        double v;
        while (ls >> v) seq.push_back(v);
        seqs.push_back(std::move(seq));
    }
    return seqs;
}

int cyclic_corr(const std::vector<double>& a, const std::vector<double>& b, int lag) {
    int acc = 0;
    for (int n = 0; n < kSyncSeqLen; ++n)
        acc += static_cast<int>(a[(n + lag) % kSyncSeqLen]) * static_cast<int>(b[n]);
    return acc;
}

// Identity list mirrored from generate_golden.py (line order of sss_golden.txt).
const std::vector<CellIdentity> kGoldenSssIdentities = {
    {0, 0}, {1, 0}, {111, 2}, {112, 0}, {167, 1}, {223, 2}, {334, 1}, {335, 2},
};

}  // namespace

TEST_CASE("cell identity decomposition is bijective and validated", "[nr_sync]") {
    for (int pci : {0, 1, 2, 3, 500, 1006, 1007}) {
        const auto cell = CellIdentity::from_pci(pci);
        REQUIRE(cell.pci() == pci);
        REQUIRE_NOTHROW(cell.validate());
    }
    REQUIRE_THROWS_AS(CellIdentity::from_pci(-1), std::domain_error);
    REQUIRE_THROWS_AS(CellIdentity::from_pci(1008), std::domain_error);
    REQUIRE_THROWS_AS((CellIdentity{336, 0}.validate()), std::domain_error);
    REQUIRE_THROWS_AS((CellIdentity{0, 3}.validate()), std::domain_error);
}

TEST_CASE("PSS matches independent golden vectors", "[nr_sync]") {
    const auto golden = load_sequences("pss_golden.txt");
    REQUIRE(golden.size() == 3);
    for (int n2 = 0; n2 < 3; ++n2) {
        const auto seq = gen_pss(n2);
        REQUIRE(golden[n2].size() == static_cast<std::size_t>(kSyncSeqLen));
        REQUIRE(seq == golden[n2]);
    }
}

TEST_CASE("PSS opening values and domain checks", "[nr_sync]") {
    const auto seq = gen_pss(0);
    const std::vector<double> head = {+1, -1, -1, +1, -1, -1, -1};
    REQUIRE(std::vector<double>(seq.begin(), seq.begin() + 7) == head);
    REQUIRE_THROWS_AS(gen_pss(-1), std::domain_error);
    REQUIRE_THROWS_AS(gen_pss(3), std::domain_error);
}

TEST_CASE("PSS has exact two-level cyclic autocorrelation", "[nr_sync]") {
    for (int n2 = 0; n2 < 3; ++n2) {
        const auto seq = gen_pss(n2);
        REQUIRE(cyclic_corr(seq, seq, 0) == 127);
        for (int lag = 1; lag < kSyncSeqLen; ++lag)
            REQUIRE(cyclic_corr(seq, seq, lag) == -1);
    }
}

TEST_CASE("PSS variants are 43-step cyclic shifts of the base sequence", "[nr_sync]") {
    const auto base = gen_pss(0);
    for (int n2 : {1, 2}) {
        const auto seq = gen_pss(n2);
        for (int n = 0; n < kSyncSeqLen; ++n)
            REQUIRE(seq[n] == base[(n + 43 * n2) % kSyncSeqLen]);
    }
}

TEST_CASE("SSS matches independent golden vectors", "[nr_sync]") {
    const auto golden = load_sequences("sss_golden.txt");
    REQUIRE(golden.size() == kGoldenSssIdentities.size());
    for (std::size_t k = 0; k < golden.size(); ++k) {
        const auto seq = gen_sss(kGoldenSssIdentities[k]);
        REQUIRE(golden[k].size() == static_cast<std::size_t>(kSyncSeqLen));
        REQUIRE(seq == golden[k]);
    }
}

TEST_CASE("SSS entries are binary and generation is reproducible", "[nr_sync]") {
    const CellIdentity cell{167, 1};
    const auto a = gen_sss(cell);
    const auto b = gen_sss(cell);
    REQUIRE(a == b);
    for (double v : a) REQUIRE((v == 1.0 || v == -1.0));
    REQUIRE_THROWS_AS(gen_sss(CellIdentity{-1, 0}), std::domain_error);
}

TEST_CASE("distinct SSS sequences have bounded cross-correlation", "[nr_sync]") {
    // Replays the frozen identity pairs from sss_xcorr_pairs.txt.  The bound
    // cannot hold for arbitrary pairs: identities whose sequence shifts align
    // (m0 - m0' == m1 - m1' mod 127) give cyclically identical SSS, so the
    // instance set is pinned together with the measured bound.
    const std::string path =
        std::string(STEALTHSIM_TEST_DATA_DIR) + "/sss_xcorr_pairs.txt";
    std::ifstream in(path);
    REQUIRE(in.good());
    int n1a, n2a, n1b, n2b, n_pairs = 0, worst = 0;
    while (in >> n1a >> n2a >> n1b >> n2b) {
        ++n_pairs;
        const auto sa = gen_sss(CellIdentity{n1a, n2a});
        const auto sb = gen_sss(CellIdentity{n1b, n2b});
        for (int lag = 0; lag < kSyncSeqLen; ++lag)
            worst = std::max(worst, std::abs(cyclic_corr(sa, sb, lag)));
    }
    REQUIRE(n_pairs == 100);
    REQUIRE(worst < 45);
    REQUIRE(worst == 17);  // exact value measured by the reference generator
}

TEST_CASE("SSB grid layout and occupancy", "[nr_sync]") {
    Rng rng(7);
    const CellIdentity cell{41, 2};
    const auto ssb = build_ssb_grid(cell, rng);
    REQUIRE(ssb.grid.rows() == kSsbSubcarriers);
    REQUIRE(ssb.grid.cols() == kSsbSymbols);

    int nonzero = 0;
    for (int c = 0; c < kSsbSymbols; ++c)
        for (int r = 0; r < kSsbSubcarriers; ++r)
            if (ssb.grid(r, c) != cd{0.0, 0.0}) {
                ++nonzero;
                REQUIRE(std::abs(ssb.grid(r, c)) == Catch::Approx(1.0).margin(1e-12));
            }
    REQUIRE(nonzero == 830);

    // Guard region around the PSS, and exact sequence placement.
    REQUIRE(ssb.grid(0, 0) == cd{0.0, 0.0});
    REQUIRE(ssb.grid(55, 0) == cd{0.0, 0.0});
    REQUIRE(ssb.grid(183, 0) == cd{0.0, 0.0});
    const auto pss = gen_pss(cell.n_id_2);
    const auto sss = gen_sss(cell);
    for (int n = 0; n < kSyncSeqLen; ++n) {
        REQUIRE(ssb.grid(kSyncFirstRow + n, 0) == cd{pss[n], 0.0});
        REQUIRE(ssb.grid(kSyncFirstRow + n, 2) == cd{sss[n], 0.0});
    }
    REQUIRE(ssb.grid(119, 2) == cd{sss[63], 0.0});

    // PBCH-only rows of symbol 2 flank the SSS; the gap rows are zero.
    REQUIRE(ssb.grid(47, 2) != cd{0.0, 0.0});
    REQUIRE(ssb.grid(48, 2) == cd{0.0, 0.0});
    REQUIRE(ssb.grid(191, 2) == cd{0.0, 0.0});
    REQUIRE(ssb.grid(192, 2) != cd{0.0, 0.0});
}

TEST_CASE("SSB zero-pattern is cell-independent and payload is rng-determined", "[nr_sync]") {
    Rng rng_a(11), rng_b(11), rng_c(12);
    const auto a = build_ssb_grid(CellIdentity{0, 0}, rng_a);
    const auto b = build_ssb_grid(CellIdentity{335, 2}, rng_b);
    const auto c = build_ssb_grid(CellIdentity{0, 0}, rng_c);
    for (int col = 0; col < kSsbSymbols; ++col)
        for (int r = 0; r < kSsbSubcarriers; ++r) {
            const bool za = a.grid(r, col) == cd{0.0, 0.0};
            const bool zb = b.grid(r, col) == cd{0.0, 0.0};
            REQUIRE(za == zb);
        }
    // Same rng seed reproduces the grid bit-exactly; a different seed changes
    // the PBCH filler but never the sync sequences.
    Rng rng_a2(11);
    const auto a2 = build_ssb_grid(CellIdentity{0, 0}, rng_a2);
    REQUIRE(a.grid == a2.grid);
    REQUIRE(a.grid != c.grid);
    for (int n = 0; n < kSyncSeqLen; ++n) {
        REQUIRE(a.grid(kSyncFirstRow + n, 0) == c.grid(kSyncFirstRow + n, 0));
        REQUIRE(a.grid(kSyncFirstRow + n, 2) == c.grid(kSyncFirstRow + n, 2));
    }
}

TEST_CASE("Case B burst schedule", "[nr_sync]") {
    const auto sched = build_burst_schedule(SsbPattern::kCaseB, 8);
    REQUIRE(sched.ssb_start_symbols == std::vector<int>{4, 8, 16, 20, 32, 36, 44, 48});
    REQUIRE(sched.n_beams == 8);
    REQUIRE(sched.ssb_start_symbols.size() == 8);
    REQUIRE(sched.period_ms == 20.0);
    REQUIRE(sched.ssb_start_symbols.back() + kSsbSymbols <= kSymbolsPerHalfFrame);
    for (std::size_t i = 1; i < sched.ssb_start_symbols.size(); ++i)
        REQUIRE(sched.ssb_start_symbols[i] > sched.ssb_start_symbols[i - 1]);

    const auto four = build_burst_schedule(SsbPattern::kCaseB, 4);
    REQUIRE(four.ssb_start_symbols == std::vector<int>{4, 8, 16, 20});

    // Purity: identical config yields an identical schedule.
    const auto again = build_burst_schedule(SsbPattern::kCaseB, 8);
    REQUIRE(again.ssb_start_symbols == sched.ssb_start_symbols);

    REQUIRE_THROWS_AS(build_burst_schedule(SsbPattern::kCaseB, 6), std::invalid_argument);
}
