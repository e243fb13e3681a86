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

// OFDM modulation/demodulation at the fixed 30 kHz / 15.36 MHz numerology.
//
// Conventions used throughout the simulator:
//   * Unitary FFT scaling (1/sqrt(512) in both directions), so signal power
//     is identical in the time and frequency domains and SNR bookkeeping
//     never needs per-domain correction factors.
//   * Centered subcarrier mapping: absolute subcarrier s (0..511, band edge
//     at s = 0) lands on raw FFT bin (s - 256) mod 512, i.e. s = 256
//     is DC.
//   * Normal cyclic prefix at numerology index 1: 28 symbols per 1 ms
//     subframe, with the long CP (44 samples) on symbols 0 and 14 of each
//     subframe and the short CP (36 samples) elsewhere, making a subframe
//     exactly 15 360 samples.
//
// All functions are pure; concurrent use is safe.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stealthsim/common.hpp"
#include "stealthsim/fft.hpp"

namespace stealthsim {

/// Fixed physical-layer timing parameters (30 kHz SCS variant).
struct Numerology {
    int scs_hz = 30'000;
    int fft_size = 512;
    int sample_rate_hz = 15'360'000;
    int cp_long = 44;
    int cp_short = 36;

    static constexpr int kSymbolsPerSubframe = 28;

    /// Cyclic-prefix length of a symbol, indexed from the start of the
    /// half-frame: long CP on symbols 0 and 14 of each 28-symbol subframe.
    int cp_len(int symbol_index) const {
        const int s = symbol_index % kSymbolsPerSubframe;
        return (s == 0 || s == 14) ? cp_long : cp_short;
    }

    int symbol_len(int symbol_index) const { return cp_len(symbol_index) + fft_size; }

    int samples_per_subframe() const {
        return kSymbolsPerSubframe * fft_size + 2 * cp_long +
               (kSymbolsPerSubframe - 2) * cp_short;
    }

    /// Sample index (from symbol 0 of subframe 0) where a symbol's CP begins.
    long long symbol_start_sample(int symbol_index) const {
        const int subframe = symbol_index / kSymbolsPerSubframe;
        const int s = symbol_index % kSymbolsPerSubframe;
        long long off = static_cast<long long>(subframe) * samples_per_subframe();
        for (int j = 0; j < s; ++j) off += symbol_len(j);
        return off;
    }

    /// Sample index where a symbol's useful (post-CP) part begins.
    long long useful_start_sample(int symbol_index) const {
        return symbol_start_sample(symbol_index) + cp_len(symbol_index);
    }

    void validate() const {
        if (static_cast<long long>(fft_size) * scs_hz != sample_rate_hz)
            throw std::invalid_argument("Numerology: fft_size * scs_hz != sample_rate_hz");
        if (samples_per_subframe() * 1000LL != sample_rate_hz)
            throw std::invalid_argument("Numerology: subframe is not exactly 1 ms");
    }
};

namespace detail {

/// Raw FFT bin for absolute subcarrier s under the centered mapping.
inline int centered_bin(int s, int fft_size) {
    return (s + fft_size / 2) % fft_size;
}

}  // namespace detail

/// OFDM-modulates `grid` (rows = subcarriers, columns = symbols) onto a
/// single-channel sample stream.  Row r is mapped to absolute subcarrier
/// subcarrier_offset + r.  Column c takes the cyclic prefix of half-frame
/// symbol index start_symbol + c, and the stream's t0 is that symbol's CP
/// start sample, so placement into a longer capture is additive.
inline SampleStream modulate(const ResourceGrid& grid, int subcarrier_offset,
                             const Numerology& num, int start_symbol = 0) {
    if (subcarrier_offset < 0 ||
        subcarrier_offset + grid.rows() > num.fft_size)
        throw std::invalid_argument(
            "modulate: grid of height " + std::to_string(grid.rows()) +
            " at subcarrier offset " + std::to_string(subcarrier_offset) +
            " does not fit in " + std::to_string(num.fft_size) + " bins");

    Fft<double> fft(static_cast<std::size_t>(num.fft_size));
    const double scale = 1.0 / std::sqrt(static_cast<double>(num.fft_size));

    long long total = 0;
    for (int c = 0; c < grid.cols(); ++c) total += num.symbol_len(start_symbol + c);

    SampleStream out;
    out.rate_hz = num.sample_rate_hz;
    out.t0 = num.symbol_start_sample(start_symbol);
    out.channels.assign(1, std::vector<cd>(static_cast<std::size_t>(total)));
    auto& samples = out.channels[0];

    std::vector<double> re(num.fft_size), im(num.fft_size);
    std::size_t w = 0;
    for (int c = 0; c < grid.cols(); ++c) {
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        for (int r = 0; r < grid.rows(); ++r) {
            const int bin = detail::centered_bin(subcarrier_offset + r, num.fft_size);
            re[bin] = grid(r, c).real();
            im[bin] = grid(r, c).imag();
        }
        fft.inverse(re.data(), im.data());

        const int cp = num.cp_len(start_symbol + c);
        for (int n = num.fft_size - cp; n < num.fft_size; ++n)
            samples[w++] = cd{re[n] * scale, im[n] * scale};
        for (int n = 0; n < num.fft_size; ++n)
            samples[w++] = cd{re[n] * scale, im[n] * scale};
    }
    return out;
}

/// Inverse of modulate for an aligned capture: samples[0] must be the first
/// CP sample of half-frame symbol index start_symbol.  Extracts rows
/// [subcarrier_offset, subcarrier_offset + n_subcarriers) of symbol_count
/// symbols.  Throws std::length_error if the capture is too short.
inline ResourceGrid demodulate(const std::vector<cd>& samples, const Numerology& num,
                               int symbol_count, int subcarrier_offset,
                               int n_subcarriers, int start_symbol = 0) {
    if (subcarrier_offset < 0 || subcarrier_offset + n_subcarriers > num.fft_size)
        throw std::invalid_argument("demodulate: subcarrier window outside the band");
    long long needed = 0;
    for (int c = 0; c < symbol_count; ++c) needed += num.symbol_len(start_symbol + c);
    if (static_cast<long long>(samples.size()) < needed)
        throw std::length_error("demodulate: need " + std::to_string(needed) +
                                " samples, got " + std::to_string(samples.size()));

    Fft<double> fft(static_cast<std::size_t>(num.fft_size));
    const double scale = 1.0 / std::sqrt(static_cast<double>(num.fft_size));

    ResourceGrid grid(n_subcarriers, symbol_count);
    std::vector<double> re(num.fft_size), im(num.fft_size);
    std::size_t rpos = 0;
    for (int c = 0; c < symbol_count; ++c) {
        rpos += static_cast<std::size_t>(num.cp_len(start_symbol + c));
        for (int n = 0; n < num.fft_size; ++n) {
            re[n] = samples[rpos + n].real();
            im[n] = samples[rpos + n].imag();
        }
        rpos += static_cast<std::size_t>(num.fft_size);
        fft.forward(re.data(), im.data());
        for (int r = 0; r < n_subcarriers; ++r) {
            const int bin = detail::centered_bin(subcarrier_offset + r, num.fft_size);
            grid(r, c) = cd{re[bin] * scale, im[bin] * scale};
        }
    }
    return grid;
}

/// Convenience overload reading channel 0 of a stream.
inline ResourceGrid demodulate(const SampleStream& stream, const Numerology& num,
                               int symbol_count, int subcarrier_offset,
                               int n_subcarriers, int start_symbol = 0) {
    if (stream.n_channels() == 0)
        throw std::length_error("demodulate: stream has no channels");
    return demodulate(stream.channels[0], num, symbol_count, subcarrier_offset,
                      n_subcarriers, start_symbol);
}

}  // namespace stealthsim
