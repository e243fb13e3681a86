#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# Independent reference generator for the PSS/SSS conformance vectors in this
# directory.  Implements the length-127 LFSR constructions of 3GPP TS 38.211
# §7.4.2 directly in Python, with no code shared with the C++ library, so the
# golden files exercise the C++ generators against a genuinely separate
# implementation.
#
# Outputs (one sequence per line, entries in {+1, -1}, space-separated):
#   pss_golden.txt       - line i holds the PSS for n_id_2 = i          (3 lines)
#   sss_golden.txt       - line k holds the SSS for SSS_IDENTITIES[k]   (8 lines)
#   sss_xcorr_pairs.txt  - the random identity pairs ("n1a n2a n1b n2b"
#                          per line) behind the frozen cross-correlation
#                          bound.  Distinct cell identities can produce
#                          SSS sequences that are cyclic shifts of each
#                          other (cross-correlation 127 at the aligning
#                          lag), so the bound is only meaningful for a
#                          pinned instance set.
#
# Run from this directory:  python3 generate_golden.py
# The script also self-checks the documented sequence properties and prints
# the measured cross-correlation bound before writing anything.

import itertools
import random

N = 127

# Identities covered by sss_golden.txt, in line order.  Keep in sync with the
# list in tests/test_nr_sync.cpp.
SSS_IDENTITIES = [
    (0, 0), (1, 0), (111, 2), (112, 0),
    (167, 1), (223, 2), (334, 1), (335, 2),
]


def m_sequence(seed_bits, tap_a, tap_b):
    """x(i+7) = (x(i+tap_a) + x(i+tap_b)) mod 2, returned as a 0/1 list.

    seed_bits is x(0..6) in natural index order.
    """
    x = list(seed_bits)
    for i in range(N - 7):
        x.append((x[i + tap_a] + x[i + tap_b]) % 2)
    return x


def gen_pss(n_id_2):
    # Seed x(6..0) = 1110110  ->  x(0..6) = 0,1,1,0,1,1,1
    x = m_sequence([0, 1, 1, 0, 1, 1, 1], 4, 0)
    return [1 - 2 * x[(n + 43 * n_id_2) % N] for n in range(N)]


def gen_sss(n_id_1, n_id_2):
    m0 = 15 * (n_id_1 // 112) + 5 * n_id_2
    m1 = n_id_1 % 112
    x0 = m_sequence([1, 0, 0, 0, 0, 0, 0], 4, 0)
    x1 = m_sequence([1, 0, 0, 0, 0, 0, 0], 1, 0)
    return [(1 - 2 * x0[(n + m0) % N]) * (1 - 2 * x1[(n + m1) % N])
            for n in range(N)]


def cyclic_corr(a, b, lag):
    return sum(a[(n + lag) % N] * b[n] for n in range(N))


def self_check():
    pss0 = gen_pss(0)
    assert pss0[:7] == [1, -1, -1, 1, -1, -1, -1], pss0[:7]
    for n2 in range(3):
        seq = gen_pss(n2)
        assert cyclic_corr(seq, seq, 0) == N
        assert all(cyclic_corr(seq, seq, lag) == -1 for lag in range(1, N))
        # gen_pss(k) is gen_pss(0) cyclically advanced by 43*k
        assert seq == [pss0[(n + 43 * n2) % N] for n in range(N)]

    # Shift-index examples
    assert (15 * (335 // 112) + 5 * 2, 335 % 112) == (40, 111)

    # Cross-correlation bound over random distinct identity pairs.  The drawn
    # pairs are saved so the C++ conformance test replays this exact set.
    rng = random.Random(20250817)
    pairs = []
    worst = 0
    while len(pairs) < 100:
        a = (rng.randrange(336), rng.randrange(3))
        b = (rng.randrange(336), rng.randrange(3))
        if a == b:
            continue
        sa, sb = gen_sss(*a), gen_sss(*b)
        worst = max(worst,
                    max(abs(cyclic_corr(sa, sb, lag)) for lag in range(N)))
        pairs.append((a, b))
    print(f"max |cyclic cross-correlation| over {len(pairs)} SSS pairs: {worst}")
    assert worst < 45, worst
    with open("sss_xcorr_pairs.txt", "w") as f:
        for (a, b) in pairs:
            f.write(f"{a[0]} {a[1]} {b[0]} {b[1]}\n")
    print(f"wrote sss_xcorr_pairs.txt ({len(pairs)} lines)")


def write_lines(path, seqs):
    with open(path, "w") as f:
        for seq in seqs:
            f.write(" ".join(f"{v:+d}" for v in seq) + "\n")
    print(f"wrote {path} ({len(seqs)} lines)")


def main():
    self_check()
    write_lines("pss_golden.txt", [gen_pss(n2) for n2 in range(3)])
    write_lines("sss_golden.txt", [gen_sss(*ident) for ident in SSS_IDENTITIES])


if __name__ == "__main__":
    main()
