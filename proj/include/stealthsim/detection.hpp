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

// Detectors and ROC construction.
//
// Three receivers are modeled:
//   * the eavesdropper's energy detector: a 512-bin spectrogram (hop 548
//     samples, arbitrary start phase) scanned by a 240-subcarrier x 4-column
//     sliding window at 1-RB frequency steps, energies summed across
//     antennas, maximum over window positions;
//   * the eavesdropper's blind correlator: matched filtering against the
//     three PSS sequences at every sample lag and every RB-granular
//     frequency offset, plus the best SSS correlation two symbols after the
//     strongest PSS hit;
//   * the UE's correlator: the identical engine restricted to the known SSB
//     frequency position.
//
// Correlator statistics are normalized so that a single (lag, offset,
// sequence) hypothesis on pure complex Gaussian noise of the configured
// variance is distributed Exp(1): statistic = |<rx, ref>|^2 / (127 * sigma^2)
// with a unit-power, 127-subcarrier reference.  A clean in-band PSS at
// per-subcarrier SNR rho then peaks near 127 * rho — the coherent
// processing gain of the 127-element sequence.
//
// Performance note: the PSS sweep is the simulator's hot loop (hundreds of
// millions of lags per Monte Carlo campaign).  It runs as overlap-save fast
// correlation in the bit-reversed spectral domain — forward DIF transform of
// each signal block, pointwise product with bit-reversed-order reference
// spectra, inverse DIT transform — which avoids every bit-reversal
// permutation pass.  Reference spectra for all frequency hypotheses are
// circular shifts of one base spectrum (a subcarrier step is 8 bins of the
// length-4096 transform), so only three base FFTs are ever computed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stealthsim/common.hpp"
#include "stealthsim/fft.hpp"
#include "stealthsim/nr_sync.hpp"
#include "stealthsim/ofdm.hpp"

namespace stealthsim {

/// Sliding-window parameters of the eavesdropper's energy detector.
struct EnergyWindowSpec {
    int width_subcarriers = 240;  ///< 20 PRBs
    int width_symbols = 4;        ///< spectrogram columns per window
    int freq_step = 12;           ///< window slide in subcarriers (1 RB)
    int time_step = 1;            ///< window slide in columns
    int hop_samples = 548;        ///< spectrogram hop (one average OFDM symbol)

    void validate() const {
        if (freq_step < 1 || time_step < 1 || hop_samples < 1)
            throw std::invalid_argument("EnergyWindowSpec: steps must be >= 1");
        if (width_subcarriers < 1 || width_symbols < 1)
            throw std::invalid_argument("EnergyWindowSpec: window must be nonempty");
    }
};

/// Hypothesis grid of the blind correlator.
struct CorrelatorSearchSpec {
    /// Absolute subcarrier index of the first PSS element, per frequency
    /// hypothesis.  The blind eavesdropper sweeps every RB-aligned position
    /// that keeps the 127 subcarriers in band.
    std::vector<int> pss_subcarrier_starts;
    std::vector<int> pss_candidates{0, 1, 2};  ///< n_id_2 hypotheses
    bool include_sss = true;  ///< add the best SSS correlation to the peak

    static CorrelatorSearchSpec full_band(int fft_size = 512) {
        CorrelatorSearchSpec spec;
        for (int s = 0; s + kSyncSeqLen <= fft_size; s += 12)
            spec.pss_subcarrier_starts.push_back(s);
        return spec;
    }

    void validate() const {
        if (pss_subcarrier_starts.empty() || pss_candidates.empty())
            throw std::invalid_argument("CorrelatorSearchSpec: empty hypothesis set");
        for (int n2 : pss_candidates)
            if (n2 < 0 || n2 > 2)
                throw std::invalid_argument("CorrelatorSearchSpec: bad n_id_2 candidate");
    }
};

/// Empirical receiver operating characteristic.
struct RocCurve {
    std::vector<std::pair<double, double>> points;  ///< (pfa, pd), sorted by pfa
    int n_h0 = 0;
    int n_h1 = 0;
};

namespace detail {

/// Number of samples between the start of the PSS symbol's useful part and
/// the start of the SSS symbol's useful part (two short-CP symbols).
inline constexpr int kSssGapSamples = 1096;

inline void require_noise_var(double noise_var) {
    if (!(noise_var > 0.0))
        throw std::domain_error("correlator: noise variance must be positive");
}

/// Time-domain PSS reference: one CP-less OFDM symbol carrying gen_pss(n2)
/// on subcarriers s0 .. s0+126 under the centered mapping, unitary scaling
/// (norm^2 = 127).
inline std::vector<cd> pss_time_ref(int n2, int s0, const Numerology& num) {
    if (s0 < 0 || s0 + kSyncSeqLen > num.fft_size)
        throw std::invalid_argument("pss_time_ref: subcarrier start " +
                                    std::to_string(s0) + " puts the sequence out of band");
    const auto pss = gen_pss(n2);
    std::vector<double> re(static_cast<std::size_t>(num.fft_size), 0.0),
        im(static_cast<std::size_t>(num.fft_size), 0.0);
    for (int n = 0; n < kSyncSeqLen; ++n)
        re[static_cast<std::size_t>((s0 + n + num.fft_size / 2) % num.fft_size)] = pss[n];
    Fft<double> fft(static_cast<std::size_t>(num.fft_size));
    fft.inverse(re.data(), im.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(num.fft_size));
    std::vector<cd> ref(static_cast<std::size_t>(num.fft_size));
    for (int i = 0; i < num.fft_size; ++i)
        ref[static_cast<std::size_t>(i)] =
            cd{re[static_cast<std::size_t>(i)] * scale, im[static_cast<std::size_t>(i)] * scale};
    return ref;
}

/// Overlap-save matched filter bank over the PSS hypothesis grid.
///
/// Work entirely in single precision: the statistics feed an empirical ROC,
/// and float keeps the hot loop inside the cache.  Instances hold the
/// precomputed bit-reversed reference spectra for every (n_id_2, subcarrier
/// start) pair and scratch buffers; they are not safe for concurrent use.
class PssSearchEngine {
  public:
    static constexpr std::size_t kBlockFft = 4096;

    PssSearchEngine(const CorrelatorSearchSpec& spec, const Numerology& num)
        : spec_(spec), fft_(kBlockFft), ref_len_(static_cast<std::size_t>(num.fft_size)) {
        spec_.validate();
        if (num.fft_size != 512)
            throw std::invalid_argument("PssSearchEngine: expects the 512-bin numerology");
        const std::size_t n_hyp =
            spec_.pss_candidates.size() * spec_.pss_subcarrier_starts.size();
        ref_br_.resize(n_hyp, std::vector<cf>(kBlockFft));

        // Base spectrum per n_id_2 at subcarrier start 0; every frequency
        // hypothesis is a circular shift by 8 bins per subcarrier.
        Fft<double> big(kBlockFft);
        std::vector<double> re(kBlockFft), im(kBlockFft);
        std::size_t hyp = 0;
        for (int n2 : spec_.pss_candidates) {
            const auto ref0 = pss_time_ref(n2, 0, num);
            std::fill(re.begin(), re.end(), 0.0);
            std::fill(im.begin(), im.end(), 0.0);
            for (std::size_t m = 0; m < ref_len_; ++m) {
                re[m] = ref0[m].real();
                im[m] = ref0[m].imag();
            }
            big.forward(re.data(), im.data());
            constexpr double inv_n = 1.0 / static_cast<double>(kBlockFft);
            for (int s0 : spec_.pss_subcarrier_starts) {
                auto& tab = ref_br_[hyp++];
                const std::size_t shift =
                    (static_cast<std::size_t>(s0) * (kBlockFft / 512)) % kBlockFft;
                for (std::size_t k = 0; k < kBlockFft; ++k) {
                    const std::size_t src = (k - shift) & (kBlockFft - 1);
                    tab[fft_.bitrev(k)] =
                        cf{static_cast<float>(re[src] * inv_n),
                           static_cast<float>(-im[src] * inv_n)};
                }
            }
        }
    }

    struct Peak {
        double value = 0.0;  ///< max |<rx, ref>|^2 (unnormalized)
        long long t = 0;     ///< lag of the maximum
        int n_id_2 = 0;
        int subcarrier_start = 0;
    };

    /// Scans one antenna's capture over lags [0, t_max] and the full
    /// hypothesis grid.  Ties resolve to the earliest block and lowest
    /// hypothesis index scanned, deterministically.
    Peak scan(const std::vector<cf>& rx, long long t_max) {
        const std::size_t advance = kBlockFft - ref_len_ + 1;  // valid lags per block
        Peak best;
        std::vector<float> xr(kBlockFft), xi(kBlockFft), cr(kBlockFft), ci(kBlockFft);
        for (long long p = 0; p <= t_max; p += static_cast<long long>(advance)) {
            // Load the block, zero-padding past the end of the capture.
            const std::size_t have =
                std::min(kBlockFft, rx.size() - static_cast<std::size_t>(p));
            for (std::size_t i = 0; i < have; ++i) {
                xr[i] = rx[static_cast<std::size_t>(p) + i].real();
                xi[i] = rx[static_cast<std::size_t>(p) + i].imag();
            }
            std::fill(xr.begin() + static_cast<std::ptrdiff_t>(have), xr.end(), 0.0f);
            std::fill(xi.begin() + static_cast<std::ptrdiff_t>(have), xi.end(), 0.0f);
            fft_.forward_br(xr.data(), xi.data());

            const std::size_t lags = static_cast<std::size_t>(
                std::min<long long>(static_cast<long long>(advance), t_max - p + 1));
            std::size_t hyp = 0;
            for (std::size_t c = 0; c < spec_.pss_candidates.size(); ++c) {
                for (std::size_t f = 0; f < spec_.pss_subcarrier_starts.size(); ++f, ++hyp) {
                    const cf* __restrict__ tab = ref_br_[hyp].data();
                    for (std::size_t k = 0; k < kBlockFft; ++k) {
                        const float tr = tab[k].real(), ti = tab[k].imag();
                        cr[k] = xr[k] * tr - xi[k] * ti;
                        ci[k] = xr[k] * ti + xi[k] * tr;
                    }
                    fft_.inverse_br(cr.data(), ci.data());
                    for (std::size_t u = 0; u < lags; ++u) {
                        const double mag =
                            static_cast<double>(cr[u]) * cr[u] + static_cast<double>(ci[u]) * ci[u];
                        if (mag > best.value) {
                            best.value = mag;
                            best.t = p + static_cast<long long>(u);
                            best.n_id_2 = spec_.pss_candidates[c];
                            best.subcarrier_start = spec_.pss_subcarrier_starts[f];
                        }
                    }
                }
            }
        }
        return best;
    }

  private:
    CorrelatorSearchSpec spec_;
    Fft<float> fft_;
    std::size_t ref_len_;
    std::vector<std::vector<cf>> ref_br_;  ///< conj(REF)/N, bit-reversed order
};

/// The +/-1 m-sequence pair underlying every SSS, cached once.
inline const std::pair<std::array<double, kSyncSeqLen>, std::array<double, kSyncSeqLen>>&
sss_base_sequences() {
    static const auto seqs = [] {
        std::pair<std::array<double, kSyncSeqLen>, std::array<double, kSyncSeqLen>> out{};
        const auto x0 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 4);
        const auto x1 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 1);
        for (int i = 0; i < kSyncSeqLen; ++i) {
            out.first[static_cast<std::size_t>(i)] = 1.0 - 2.0 * x0[static_cast<std::size_t>(i)];
            out.second[static_cast<std::size_t>(i)] = 1.0 - 2.0 * x1[static_cast<std::size_t>(i)];
        }
        return out;
    }();
    return seqs;
}

/// Best SSS correlation (|dot|^2 over all 336 n_id_1 candidates) in the
/// 512-sample window starting `sss_useful_start`, for the PSS hypothesis
/// (n_id_2, subcarrier start) found by the first stage.
inline double best_sss_metric(const std::vector<cf>& rx, long long sss_useful_start,
                              int s0, int n_id_2, const Numerology& num) {
    const std::size_t n_fft = static_cast<std::size_t>(num.fft_size);
    std::vector<double> re(n_fft), im(n_fft);
    for (std::size_t i = 0; i < n_fft; ++i) {
        const cf v = rx[static_cast<std::size_t>(sss_useful_start) + i];
        re[i] = v.real();
        im[i] = v.imag();
    }
    Fft<double> fft(n_fft);
    fft.forward(re.data(), im.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(num.fft_size));

    std::array<double, kSyncSeqLen> br{}, bi{};
    for (int n = 0; n < kSyncSeqLen; ++n) {
        const std::size_t bin =
            static_cast<std::size_t>((s0 + n + num.fft_size / 2) % num.fft_size);
        br[static_cast<std::size_t>(n)] = re[bin] * scale;
        bi[static_cast<std::size_t>(n)] = im[bin] * scale;
    }

    // All SSS candidates share two base m-sequences; only the shifts differ.
    const auto& [x0, x1] = sss_base_sequences();
    double best = 0.0;
    for (int n1 = 0; n1 < 336; ++n1) {
        const int m0 = 15 * (n1 / 112) + 5 * n_id_2;
        const int m1 = n1 % 112;
        double dr = 0.0, di = 0.0;
        for (int n = 0; n < kSyncSeqLen; ++n) {
            const double s =
                x0[static_cast<std::size_t>((n + m0) % kSyncSeqLen)] *
                x1[static_cast<std::size_t>((n + m1) % kSyncSeqLen)];
            dr += s * br[static_cast<std::size_t>(n)];
            di += s * bi[static_cast<std::size_t>(n)];
        }
        best = std::max(best, dr * dr + di * di);
    }
    return best;
}

}  // namespace detail

/// Eavesdropper energy detector.  `start_offset` is the spectrogram's first
/// sample (the eavesdropper is not symbol-synchronized, so campaigns draw it
/// uniformly from [0, hop)).  Throws std::length_error if the capture cannot
/// hold a single window.
inline double energy_statistic(const DetectorStream& stream, const EnergyWindowSpec& spec,
                               const Numerology& num, int start_offset = 0) {
    spec.validate();
    if (stream.empty()) throw std::length_error("energy_statistic: no antennas");
    if (start_offset < 0 || start_offset >= spec.hop_samples)
        throw std::invalid_argument("energy_statistic: start offset outside [0, hop)");
    const std::size_t n_fft = static_cast<std::size_t>(num.fft_size);
    const std::size_t n_samples = stream[0].size();
    for (const auto& ch : stream)
        if (ch.size() != n_samples)
            throw std::invalid_argument("energy_statistic: ragged antenna streams");

    const long long span =
        static_cast<long long>(start_offset) +
        static_cast<long long>(spec.width_symbols - 1) * spec.hop_samples +
        static_cast<long long>(n_fft);
    if (static_cast<long long>(n_samples) < span)
        throw std::length_error("energy_statistic: capture shorter than one window");

    const int n_cols = static_cast<int>(
        (n_samples - start_offset - n_fft) / static_cast<std::size_t>(spec.hop_samples) + 1);
    const int n_freq_starts =
        (num.fft_size - spec.width_subcarriers) / spec.freq_step + 1;

    // Per-column window sums over frequency, summed across antennas:
    // wsum[f][col] = total power in subcarriers [f*step, f*step + width).
    std::vector<std::vector<double>> wsum(
        static_cast<std::size_t>(n_freq_starts),
        std::vector<double>(static_cast<std::size_t>(n_cols), 0.0));

    Fft<float> fft(n_fft);
    std::vector<float> re(n_fft), im(n_fft);
    std::vector<double> power(n_fft), prefix(n_fft + 1);
    const double inv_n = 1.0 / static_cast<double>(n_fft);  // unitary |FFT|^2
    for (const auto& ch : stream) {
        for (int col = 0; col < n_cols; ++col) {
            const std::size_t base = static_cast<std::size_t>(start_offset) +
                                     static_cast<std::size_t>(col) *
                                         static_cast<std::size_t>(spec.hop_samples);
            for (std::size_t i = 0; i < n_fft; ++i) {
                re[i] = ch[base + i].real();
                im[i] = ch[base + i].imag();
            }
            fft.forward(re.data(), im.data());
            // Index power by absolute subcarrier via the centered mapping.
            for (std::size_t s = 0; s < n_fft; ++s) {
                const std::size_t bin = (s + n_fft / 2) & (n_fft - 1);
                power[s] = (static_cast<double>(re[bin]) * re[bin] +
                            static_cast<double>(im[bin]) * im[bin]) *
                           inv_n;
            }
            prefix[0] = 0.0;
            for (std::size_t s = 0; s < n_fft; ++s) prefix[s + 1] = prefix[s] + power[s];
            for (int f = 0; f < n_freq_starts; ++f) {
                const std::size_t lo = static_cast<std::size_t>(f * spec.freq_step);
                wsum[static_cast<std::size_t>(f)][static_cast<std::size_t>(col)] +=
                    prefix[lo + static_cast<std::size_t>(spec.width_subcarriers)] - prefix[lo];
            }
        }
    }

    double best = 0.0;
    for (int f = 0; f < n_freq_starts; ++f) {
        const auto& row = wsum[static_cast<std::size_t>(f)];
        for (int col = 0; col + spec.width_symbols <= n_cols; col += spec.time_step) {
            double acc = 0.0;
            for (int j = 0; j < spec.width_symbols; ++j)
                acc += row[static_cast<std::size_t>(col + j)];
            best = std::max(best, acc);
        }
    }
    return best;
}

/// Single-hypothesis correlator evaluation (primarily for tests and
/// calibration): normalized PSS metric |<rx[t..], ref>|^2 / (127 sigma^2).
inline double correlate_pss_at(const std::vector<cf>& rx, long long t,
                               int pss_subcarrier_start, int n_id_2,
                               const Numerology& num, double noise_var) {
    detail::require_noise_var(noise_var);
    if (t < 0 || t + num.fft_size > static_cast<long long>(rx.size()))
        throw std::length_error("correlate_pss_at: window out of range");
    const auto ref = detail::pss_time_ref(n_id_2, pss_subcarrier_start, num);
    cd acc{0.0, 0.0};
    for (int m = 0; m < num.fft_size; ++m)
        acc += cd(rx[static_cast<std::size_t>(t + m)]) * std::conj(ref[static_cast<std::size_t>(m)]);
    return std::norm(acc) / (static_cast<double>(kSyncSeqLen) * noise_var);
}

/// Eavesdropper blind correlator statistic over the full hypothesis grid.
/// Per antenna: the strongest normalized PSS correlation over every lag,
/// frequency hypothesis, and sequence candidate, plus (when enabled) the
/// best-matching SSS correlation two symbols later at the same hypothesis;
/// the statistic is the maximum of that sum across antennas.
inline double correlator_statistic(const DetectorStream& stream,
                                   const CorrelatorSearchSpec& spec, const Numerology& num,
                                   double noise_var) {
    detail::require_noise_var(noise_var);
    spec.validate();
    if (stream.empty()) throw std::length_error("correlator_statistic: no antennas");
    const long long n_samples = static_cast<long long>(stream[0].size());
    const long long tail =
        spec.include_sss ? detail::kSssGapSamples + num.fft_size : num.fft_size;
    const long long t_max = n_samples - tail;
    if (t_max < 0)
        throw std::length_error("correlator_statistic: capture shorter than one window");

    detail::PssSearchEngine engine(spec, num);
    const double norm = static_cast<double>(kSyncSeqLen) * noise_var;
    double best = 0.0;
    for (const auto& rx : stream) {
        if (static_cast<long long>(rx.size()) != n_samples)
            throw std::invalid_argument("correlator_statistic: ragged antenna streams");
        const auto peak = engine.scan(rx, t_max);
        double stat = peak.value / norm;
        if (spec.include_sss)
            stat += detail::best_sss_metric(rx, peak.t + detail::kSssGapSamples,
                                            peak.subcarrier_start, peak.n_id_2, num) /
                    norm;
        best = std::max(best, stat);
    }
    return best;
}

/// UE correlator: the same engine with the frequency hypothesis pinned to
/// the known SSB placement (`ssb_subcarrier_offset` is the SSB grid's first
/// absolute subcarrier; the PSS starts 56 subcarriers above it).
inline double ue_correlator_statistic(const DetectorStream& stream,
                                      int ssb_subcarrier_offset, const Numerology& num,
                                      double noise_var) {
    CorrelatorSearchSpec spec;
    spec.pss_subcarrier_starts = {ssb_subcarrier_offset + kSyncFirstRow};
    return correlator_statistic(stream, spec, num, noise_var);
}

/// Empirical ROC from pooled statistics: thresholds sweep the sorted union
/// of every observed value; pfa/pd count statistics >= threshold.  Points
/// are deduplicated, sorted by pfa, and closed with (0, pd_at_max) and (1, 1).
inline RocCurve roc_curve(const std::vector<double>& h0_stats,
                          const std::vector<double>& h1_stats) {
    if (h0_stats.empty() || h1_stats.empty())
        throw std::invalid_argument("roc_curve: empty statistic list");

    std::vector<double> h0 = h0_stats, h1 = h1_stats;
    std::sort(h0.begin(), h0.end());
    std::sort(h1.begin(), h1.end());

    std::vector<double> thresholds;
    thresholds.reserve(h0.size() + h1.size());
    thresholds.insert(thresholds.end(), h0.begin(), h0.end());
    thresholds.insert(thresholds.end(), h1.begin(), h1.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    RocCurve curve;
    curve.n_h0 = static_cast<int>(h0.size());
    curve.n_h1 = static_cast<int>(h1.size());

    auto tail_fraction = [](const std::vector<double>& sorted, double thr) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), thr);
        return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
    };

    curve.points.emplace_back(1.0, 1.0);  // threshold below every statistic
    for (double thr : thresholds)
        curve.points.emplace_back(tail_fraction(h0, thr), tail_fraction(h1, thr));
    curve.points.emplace_back(0.0, 0.0);  // threshold above every statistic

    std::sort(curve.points.begin(), curve.points.end());
    curve.points.erase(std::unique(curve.points.begin(), curve.points.end()),
                       curve.points.end());
    return curve;
}

/// Trapezoidal area under the (pfa, pd) curve.
inline double auc(const RocCurve& curve) {
    if (curve.points.size() < 2)
        throw std::invalid_argument("auc: curve needs at least two points");
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& [x0, y0] = curve.points[i - 1];
        const auto& [x1, y1] = curve.points[i];
        area += 0.5 * (y0 + y1) * (x1 - x0);
    }
    return area;
}

/// Detection probability at the largest achieved pfa <= target (step
/// interpolation of the empirical curve).
inline double pd_at_pfa(const RocCurve& curve, double target_pfa) {
    if (curve.points.empty()) throw std::invalid_argument("pd_at_pfa: empty curve");
    double pd = 0.0;
    for (const auto& [pfa, p] : curve.points) {
        if (pfa > target_pfa) break;
        pd = p;
    }
    return pd;
}

}  // namespace stealthsim
