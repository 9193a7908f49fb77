"""Shared independent oracles for the test suite.

Everything here deliberately avoids the library's own scan paths: blocks
are extracted one substring at a time, positions are filtered by rational
membership tests, so agreement with the rolling-code engine is meaningful.
"""

from fractions import Fraction

import numpy as np

from pgen.blockcount import Interval, IntervalUnion, PositionSet


def naive_histogram(x, b: int, k: int, positions: PositionSet) -> dict[int, int]:
    """Tally k-blocks by extracting each substring independently."""
    x = list(int(s) for s in x)
    out: dict[int, int] = {}
    for j in positions.indices():
        code = 0
        for t in range(k):
            code = code * b + x[j - 1 + t]
        out[code] = out.get(code, 0) + 1
    return out


def brute_force_positions(S: IntervalUnion, b: int, k: int) -> list[int]:
    """All j >= 1 with j/b^k in S, by direct rational membership."""
    bk = b**k
    j_cap = 0
    for iv in S.intervals:
        scaled = iv.hi * bk
        j_cap = max(j_cap, scaled.numerator // scaled.denominator + 1)
    out = []
    for j in range(1, j_cap + 1):
        v = Fraction(j, bk)
        for iv in S.intervals:
            lo_ok = v >= iv.lo if iv.lo_closed else v > iv.lo
            hi_ok = v <= iv.hi if iv.hi_closed else v < iv.hi
            if lo_ok and hi_ok:
                out.append(j)
                break
    return out


def random_interval_union(rng, max_positions: int, b: int, k: int) -> IntervalUnion:
    """Random 1-3 disjoint rational intervals whose scaled positions stay
    within max_positions."""
    bk = b**k
    hi_cap = Fraction(max_positions, bk)
    n = rng.randint(1, 3)
    cuts = sorted(
        Fraction(rng.randint(0, 64), 64) * hi_cap for _ in range(2 * n)
    )
    ivs = []
    for t in range(n):
        lo, hi = cuts[2 * t], cuts[2 * t + 1]
        if lo == hi:
            continue
        ivs.append(
            Interval(lo, hi, lo_closed=bool(rng.getrandbits(1)), hi_closed=bool(rng.getrandbits(1)))
        )
    merged = []
    for iv in ivs:
        if merged and not (
            merged[-1].hi < iv.lo
            or (merged[-1].hi == iv.lo and not (merged[-1].hi_closed and iv.lo_closed))
        ):
            continue
        merged.append(iv)
    if not merged:
        merged = [Interval(Fraction(0), max(hi_cap, Fraction(1, bk)))]
    return IntervalUnion(tuple(merged))


def histogram_as_dict(h) -> dict[int, int]:
    return dict(h.items())


def random_symbols(rng, b: int, n: int) -> np.ndarray:
    return np.array([rng.randrange(b) for _ in range(n)], dtype=np.uint8)


def overlap_enumeration(b: int, k: int, i: int, j: int, prefix_len: int):
    """Exhaustively enumerate all prefixes of the given length and all
    k-words, counting occurrence indicators at positions i and j.

    Returns exact fractions (joint of both positions, marginal at i,
    marginal at j) over the b^prefix_len * b^k pairs.
    """
    from itertools import product

    joint = 0
    marg_i = 0
    marg_j = 0
    total = 0
    for x in product(range(b), repeat=prefix_len):
        for word in product(range(b), repeat=k):
            at_i = x[i - 1 : i - 1 + k] == word
            at_j = x[j - 1 : j - 1 + k] == word
            joint += at_i and at_j
            marg_i += at_i
            marg_j += at_j
            total += 1
    return Fraction(joint, total), Fraction(marg_i, total), Fraction(marg_j, total)
