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
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stealthsim/common.hpp"

namespace stealthsim {

/// Table-driven power-of-two FFT over split re/im arrays. The same code path
/// runs on every call, so output is bit-reproducible run to run; this is
/// load-bearing for the byte-identical result files the campaign layer
/// guarantees.
///
/// Two API levels:
///  - forward()/inverse(): natural-order in and out (bit-reversal permutation
///    applied internally), plus unitary complex wrappers scaling by 1/sqrt(N)
///    in both directions.
///  - forward_br()/inverse_br(): permutation-free fast path for convolution
///    work. forward_br leaves the spectrum in bit-reversed order; inverse_br
///    consumes a bit-reversed spectrum and yields natural-order samples.
///    Pointwise spectral products are order-agnostic, so fixed spectra can be
///    stored bit-reversed once (see bitrev()) and the permutation never runs.
///
/// Conventions: forward = sum_n x[n] exp(-j 2 pi k n / N), inverse = conjugate
/// kernel; neither direction scales, except the unitary wrappers.
///
/// Instances are cheap to build and not safe for concurrent use; give each
/// worker thread its own.
template <typename T>
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n < 4 || (n & (n - 1)) != 0)
            throw std::invalid_argument("Fft: size must be a power of two >= 4");
        build_tables();
    }

    std::size_t size() const { return n_; }

    /// Position of natural-order bin k inside a bit-reversed spectrum.
    std::size_t bitrev(std::size_t k) const { return bitrev_[k]; }

    // ---- natural-order API ------------------------------------------------

    void forward(T* re, T* im) const {
        forward_br(re, im);
        permute(re, im);
    }
    void inverse(T* re, T* im) const {
        permute(re, im);
        inverse_br(re, im);
    }

    void forward_unitary(std::complex<T>* x) const {
        split(x);
        forward(work_re_.data(), work_im_.data());
        merge_scaled(x, unitary_scale());
    }
    void inverse_unitary(std::complex<T>* x) const {
        split(x);
        inverse(work_re_.data(), work_im_.data());
        merge_scaled(x, unitary_scale());
    }

    // ---- bit-reversed-domain API -------------------------------------------

    /// Decimation-in-frequency forward pass: natural in, bit-reversed out.
    void forward_br(T* __restrict__ re, T* __restrict__ im) const {
        for (std::size_t half = n_ / 2; half >= 2; half /= 2) {
            const T* wr = tw_re_.data() + (half - 1);
            const T* wi = tw_im_.data() + (half - 1);
            for (std::size_t base = 0; base < n_; base += 2 * half)
                dif_pass(re + base, im + base, re + base + half, im + base + half,
                         wr, wi, half);
        }
        for (std::size_t base = 0; base < n_; base += 2) {
            const T ar = re[base], ai = im[base], br = re[base + 1], bi = im[base + 1];
            re[base] = ar + br;
            im[base] = ai + bi;
            re[base + 1] = ar - br;
            im[base + 1] = ai - bi;
        }
    }

    /// Decimation-in-time inverse pass: bit-reversed in, natural out.
    void inverse_br(T* __restrict__ re, T* __restrict__ im) const {
        for (std::size_t base = 0; base < n_; base += 2) {
            const T tr = re[base + 1], ti = im[base + 1];
            re[base + 1] = re[base] - tr;
            im[base + 1] = im[base] - ti;
            re[base] += tr;
            im[base] += ti;
        }
        for (std::size_t half = 2; half < n_; half *= 2) {
            const T* wr = tw_re_.data() + (half - 1);
            const T* wi = tw_im_.data() + (half - 1);
            for (std::size_t base = 0; base < n_; base += 2 * half)
                dit_pass_conj(re + base, im + base, re + base + half, im + base + half,
                              wr, wi, half);
        }
    }

  private:
    // a' = a + b ; b' = (a - b) * w, with w from the forward table.
    static void dif_pass(T* __restrict__ re0, T* __restrict__ im0,
                         T* __restrict__ re1, T* __restrict__ im1,
                         const T* __restrict__ wr, const T* __restrict__ wi,
                         std::size_t len) {
        for (std::size_t j = 0; j < len; ++j) {
            const T ar = re0[j], ai = im0[j], br = re1[j], bi = im1[j];
            const T dr = ar - br, di = ai - bi;
            re0[j] = ar + br;
            im0[j] = ai + bi;
            re1[j] = dr * wr[j] - di * wi[j];
            im1[j] = dr * wi[j] + di * wr[j];
        }
    }

    // t = b * conj(w) ; b' = a - t ; a' = a + t  (inverse kernel).
    static void dit_pass_conj(T* __restrict__ re0, T* __restrict__ im0,
                              T* __restrict__ re1, T* __restrict__ im1,
                              const T* __restrict__ wr, const T* __restrict__ wi,
                              std::size_t len) {
        for (std::size_t j = 0; j < len; ++j) {
            const T tr = re1[j] * wr[j] + im1[j] * wi[j];
            const T ti = im1[j] * wr[j] - re1[j] * wi[j];
            re1[j] = re0[j] - tr;
            im1[j] = im0[j] - ti;
            re0[j] += tr;
            im0[j] += ti;
        }
    }

    void build_tables() {
        bitrev_.resize(n_);
        bitrev_[0] = 0;
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n_) ++log2n;
        for (std::size_t i = 1; i < n_; ++i)
            bitrev_[i] = (bitrev_[i >> 1] >> 1) | ((i & 1) << (log2n - 1));

        // Flat per-stage twiddles: the stage with half-length h keeps its h
        // factors exp(-j pi j / h) at offset h - 1.
        tw_re_.resize(n_ - 1);
        tw_im_.resize(n_ - 1);
        for (std::size_t half = 1; half < n_; half *= 2) {
            for (std::size_t j = 0; j < half; ++j) {
                const double a = -kPi * static_cast<double>(j) / static_cast<double>(half);
                tw_re_[half - 1 + j] = static_cast<T>(std::cos(a));
                tw_im_[half - 1 + j] = static_cast<T>(std::sin(a));
            }
        }
        work_re_.resize(n_);
        work_im_.resize(n_);
    }

    void permute(T* re, T* im) const {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = bitrev_[i];
            if (j > i) {
                std::swap(re[i], re[j]);
                std::swap(im[i], im[j]);
            }
        }
    }

    T unitary_scale() const {
        return static_cast<T>(1.0 / std::sqrt(static_cast<double>(n_)));
    }

    void split(const std::complex<T>* x) const {
        for (std::size_t i = 0; i < n_; ++i) {
            work_re_[i] = x[i].real();
            work_im_[i] = x[i].imag();
        }
    }
    void merge_scaled(std::complex<T>* x, T s) const {
        for (std::size_t i = 0; i < n_; ++i)
            x[i] = {work_re_[i] * s, work_im_[i] * s};
    }

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<T> tw_re_, tw_im_;
    mutable std::vector<T> work_re_, work_im_;
};

}  // namespace stealthsim
