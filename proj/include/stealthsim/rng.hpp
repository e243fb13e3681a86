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
#include <cstdint>
#include <random>

#include "stealthsim/common.hpp"

namespace stealthsim {

/// Deterministic random source. Every distribution is implemented on top of
/// the raw 64-bit output of std::mt19937_64, so a given seed produces the
/// same sample sequence on every run and every platform; nothing here depends
/// on libstdc++'s distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_base_(seed), engine_(seed) {}

    /// Independent child stream. Mixing is splitmix64-style so nearby
    /// (seed, id) pairs land far apart in state space.
    Rng fork(std::uint64_t stream_id) const {
        return Rng(mix(seed_base_, stream_id));
    }

    /// Stream for one Monte Carlo trial: fully determined by (seed, index),
    /// independent of execution order.
    static Rng for_trial(std::uint64_t seed, std::uint64_t trial_index) {
        return Rng(mix(seed, 0x9e3779b97f4a7c15ULL + trial_index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive). Modulo bias is below 2^-32
    /// for every span used in this project (spans are < 2^31).
    long long uniform_int(long long lo, long long hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long long>(engine_() % span);
    }

    /// Standard normal via Box-Muller (cached second value).
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Circularly-symmetric complex Gaussian with E|x|^2 = variance.
    cd cgaussian(double variance = 1.0) {
        const double s = std::sqrt(0.5 * variance);
        const double re = gaussian();
        const double im = gaussian();
        return {s * re, s * im};
    }

    /// Unit-power QPSK symbol, (+-1 +-1j)/sqrt(2).
    cd qpsk() {
        const std::uint64_t bits = engine_();
        const double inv_sqrt2 = 0.7071067811865476;
        return {(bits & 1) ? inv_sqrt2 : -inv_sqrt2,
                (bits & 2) ? inv_sqrt2 : -inv_sqrt2};
    }

    /// Uniform point on the annulus r in [r_min, r_max] (area-uniform).
    void disc_point(double r_min, double r_max, double& x, double& y) {
        const double u = uniform();
        const double r = std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min));
        const double phi = uniform(0.0, 2.0 * kPi);
        x = r * std::cos(phi);
        y = r * std::sin(phi);
    }

  private:
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_base_;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace stealthsim
