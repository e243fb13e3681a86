// SPDX-License-Identifier: Apache-2.0
//
// stealthsim — link-level simulator for 5G NR downlink synchronization
// detectability under directional beam management
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Covered here:
// - transform agrees with a naive O(N^2) DFT oracle
// - unitary round trip and Parseval energy preservation
// - deterministic random source: moments, reproducibility, stream independence

#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include "stealthsim/fft.hpp"
#include "stealthsim/rng.hpp"
#include "test_support.hpp"

using namespace stealthsim;

TEST_CASE("transform matches naive DFT oracle", "[fft]") {
    Rng rng(101);
    for (std::size_t n : {std::size_t{16}, std::size_t{512}}) {
        std::vector<cd> x(n);
        for (auto& v : x) v = rng.cgaussian();

        std::vector<double> re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
            re[i] = x[i].real();
            im[i] = x[i].imag();
        }
        Fft<double> fft(n);
        fft.forward(re.data(), im.data());

        const auto oracle = testsupport::naive_dft(x, false);
        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            max_err = std::max(max_err, std::abs(cd{re[i], im[i]} - oracle[i]));
        REQUIRE(max_err < 1e-9 * std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("inverse transform matches naive inverse DFT oracle", "[fft]") {
    Rng rng(102);
    const std::size_t n = 64;
    std::vector<cd> x(n);
    for (auto& v : x) v = rng.cgaussian();

    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = x[i].real();
        im[i] = x[i].imag();
    }
    Fft<double> fft(n);
    fft.inverse(re.data(), im.data());

    const auto oracle = testsupport::naive_dft(x, true);
    for (std::size_t i = 0; i < n; ++i)
        REQUIRE(std::abs(cd{re[i], im[i]} - oracle[i]) < 1e-10);
}

TEST_CASE("unitary round trip is identity and preserves energy", "[fft]") {
    Rng rng(103);
    const std::size_t n = 512;
    std::vector<cd> x(n), orig;
    for (auto& v : x) v = rng.cgaussian();
    orig = x;

    Fft<double> fft(n);
    fft.forward_unitary(x.data());

    double e_freq = 0.0, e_time = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        e_freq += std::norm(x[i]);
        e_time += std::norm(orig[i]);
    }
    REQUIRE(e_freq == Catch::Approx(e_time).epsilon(1e-12));

    fft.inverse_unitary(x.data());
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_err = std::max(max_err, std::abs(x[i] - orig[i]));
    REQUIRE(max_err < 1e-12);
}

TEST_CASE("invalid sizes are rejected", "[fft]") {
    REQUIRE_THROWS_AS(Fft<double>(0), std::invalid_argument);
    REQUIRE_THROWS_AS(Fft<double>(1), std::invalid_argument);
    REQUIRE_THROWS_AS(Fft<double>(48), std::invalid_argument);
}

TEST_CASE("random source is reproducible and forks are independent", "[fft]") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng base(7);
    Rng f1 = base.fork(1);
    Rng f2 = base.fork(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (f1.next_u64() == f2.next_u64());
    REQUIRE(same == 0);

    Rng t5a = Rng::for_trial(99, 5), t5b = Rng::for_trial(99, 5);
    REQUIRE(t5a.next_u64() == t5b.next_u64());
}

TEST_CASE("gaussian moments and complex variance", "[fft]") {
    Rng rng(202);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, cvar = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
        cvar += std::norm(rng.cgaussian(2.5));
    }
    REQUIRE(std::abs(sum / n) < 0.01);
    REQUIRE(sum2 / n == Catch::Approx(1.0).margin(0.02));
    REQUIRE(cvar / n == Catch::Approx(2.5).margin(0.05));
}

TEST_CASE("annulus sampling respects bounds and area uniformity", "[fft]") {
    Rng rng(303);
    int inner = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double x, y;
        rng.disc_point(10.0, 100.0, x, y);
        const double r = std::hypot(x, y);
        REQUIRE(r >= 10.0);
        REQUIRE(r <= 100.0);
        // Half-area radius for the 10..100 annulus: sqrt((100 + 10000)/2).
        if (r < std::sqrt((100.0 + 10000.0) / 2.0)) ++inner;
    }
    REQUIRE(std::abs(inner / static_cast<double>(n) - 0.5) < 0.01);
}

TEST_CASE("bit-reversed-domain pipeline equals natural-order results", "[fft]") {
    Rng rng(404);
    const std::size_t n = 256;
    Fft<double> fft(n);

    std::vector<double> re(n), im(n), re_ref(n), im_ref(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = re_ref[i] = rng.gaussian();
        im[i] = im_ref[i] = rng.gaussian();
    }

    fft.forward(re_ref.data(), im_ref.data());
    fft.forward_br(re.data(), im.data());
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t p = fft.bitrev(k);
        REQUIRE(re[p] == Catch::Approx(re_ref[k]).margin(1e-9));
        REQUIRE(im[p] == Catch::Approx(im_ref[k]).margin(1e-9));
    }
}

TEST_CASE("spectral product in bit-reversed order computes correlation", "[fft]") {
    // Correlate x against a short reference via the permutation-free path and
    // check one lag against the direct inner product.
    Rng rng(405);
    const std::size_t n = 1024, ref_len = 64;
    std::vector<cd> x(n), ref(ref_len);
    for (auto& v : x) v = rng.cgaussian();
    for (auto& v : ref) v = rng.cgaussian();

    Fft<double> fft(n);
    std::vector<double> xr(n), xi(n), rr(n, 0.0), ri(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        xr[i] = x[i].real();
        xi[i] = x[i].imag();
    }
    for (std::size_t i = 0; i < ref_len; ++i) {
        rr[i] = ref[i].real();
        ri[i] = ref[i].imag();
    }
    fft.forward_br(xr.data(), xi.data());
    fft.forward_br(rr.data(), ri.data());
    // pointwise x * conj(ref) in bit-reversed order, scaled by 1/n
    std::vector<double> pr(n), pi(n);
    for (std::size_t i = 0; i < n; ++i) {
        pr[i] = (xr[i] * rr[i] + xi[i] * ri[i]) / static_cast<double>(n);
        pi[i] = (xi[i] * rr[i] - xr[i] * ri[i]) / static_cast<double>(n);
    }
    fft.inverse_br(pr.data(), pi.data());

    for (std::size_t lag : {std::size_t{0}, std::size_t{100}, std::size_t{900}}) {
        cd direct{0.0, 0.0};
        for (std::size_t m = 0; m < ref_len; ++m)
            direct += x[(lag + m) % n] * std::conj(ref[m]);
        REQUIRE(pr[lag] == Catch::Approx(direct.real()).margin(1e-9));
        REQUIRE(pi[lag] == Catch::Approx(direct.imag()).margin(1e-9));
    }
}
