"""Streaming k-block occurrence counting over exact position sets.

The scan counts, for every word of length k, how often it occurs at the
positions ``N ∩ b^k S`` of a symbol stream, where S is a finite union of
rational-endpoint intervals.  Position arithmetic is exact (integer and
``fractions.Fraction`` only); floating point never touches an index.

A k-block starting at position j (1-based) is encoded most significant
symbol first as an integer in [0, b^k), and a single forward pass maintains
the rolling code  w <- (w mod b^(k-1)) * b + s.  Histograms are dense numpy
arrays when b^k fits the configured cell cap, open-addressed dictionaries
otherwise; both modes produce identical results.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataFormatError, ResourceLimitError, UsageError
from .seqgen import Alphabet, SymbolSource

DEFAULT_MEM_CAP_CELLS = 1 << 28
_MAX_BK = 1 << 50          # positions guard: b^k * p must stay well inside 128 bits
_MAX_ENDPOINT_NUMERATOR = 1 << 20
_MAX_CODE = 1 << 62        # rolling codes are int64


def as_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, or a 'p/q' / 'p' string.

    Floats are rejected: thresholds like floor(lambda * b^k) must be exact.
    """
    if isinstance(value, float):
        raise UsageError(f"rational expected, got float {value!r}; pass 'p/q' or Fraction")
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


def floor_scaled(lam, b: int, k: int) -> int:
    """floor(lambda * b^k) computed exactly."""
    f = as_fraction(lam)
    return (f.numerator * b**k) // f.denominator


# ---------------------------------------------------------------------------
# Word codes
# ---------------------------------------------------------------------------

def encode_block(symbols: Sequence[int], b: int) -> int:
    """Integer code of a word, most significant symbol first."""
    code = 0
    for s in symbols:
        if not 0 <= int(s) < b:
            raise UsageError(f"symbol {s} outside alphabet 0..{b - 1}")
        code = code * b + int(s)
    return code


def decode_block(code: int, b: int, k: int) -> tuple[int, ...]:
    """Inverse of :func:`encode_block` for a word of length k."""
    if not 0 <= code < b**k:
        raise UsageError(f"code {code} outside [0, {b}^{k})")
    out = []
    for _ in range(k):
        code, r = divmod(code, b)
        out.append(r)
    return tuple(reversed(out))


# ---------------------------------------------------------------------------
# Intervals and position sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """One interval on the non-negative reals with rational endpoints.

    Endpoint inclusion is per-side; the default (lo, hi] matches the
    prefix sets (0, lambda].
    """

    lo: Fraction
    hi: Fraction
    lo_closed: bool = False
    hi_closed: bool = True

    def __post_init__(self):
        if self.lo < 0 or self.hi < 0:
            raise UsageError(f"interval endpoints must be >= 0, got ({self.lo}, {self.hi})")
        if not self.lo < self.hi:
            raise UsageError(f"interval needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self) -> str:
        lob = "[" if self.lo_closed else "("
        hib = "]" if self.hi_closed else ")"
        return f"{lob}{self.lo},{self.hi}{hib}"


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of pairwise disjoint intervals, sorted ascending."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        ivs = self.intervals
        if not ivs:
            raise UsageError("interval union needs at least one interval")
        for a, nxt in zip(ivs, ivs[1:]):
            touching_ok = a.hi < nxt.lo or (
                a.hi == nxt.lo and not (a.hi_closed and nxt.lo_closed)
            )
            if not touching_ok:
                raise UsageError(f"intervals {a} and {nxt} are not disjoint/sorted")

    @property
    def n(self) -> int:
        return len(self.intervals)

    @property
    def measure(self) -> Fraction:
        return sum((iv.measure for iv in self.intervals), Fraction(0))

    def __str__(self) -> str:
        return "+".join(str(iv) for iv in self.intervals)

    @classmethod
    def from_lambda(cls, lam) -> "IntervalUnion":
        """The prefix set (0, lambda]."""
        return cls((Interval(Fraction(0), as_fraction(lam)),))

    @classmethod
    def parse(cls, text: str) -> "IntervalUnion":
        """Parse literals like ``(0,1]`` or ``(0,1]+(3/2,2]``."""
        import re

        parts = [p for p in re.split(r"[+\s]+", text.strip()) if p]
        pat = re.compile(r"^([\(\[])([0-9]+(?:/[0-9]+)?),([0-9]+(?:/[0-9]+)?)([\)\]])$")
        ivs = []
        for part in parts:
            m = pat.match(part)
            if not m:
                raise UsageError(f"cannot parse interval {part!r} (expected like '(0,1]')")
            ivs.append(
                Interval(
                    Fraction(m.group(2)),
                    Fraction(m.group(3)),
                    lo_closed=m.group(1) == "[",
                    hi_closed=m.group(4) == "]",
                )
            )
        return cls(tuple(ivs))


@dataclass(frozen=True)
class PositionSet:
    """Disjoint ascending runs of 1-based integer positions."""

    runs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prev_hi = 0
        for lo, hi in self.runs:
            if lo < 1 or hi < lo:
                raise UsageError(f"bad run [{lo}, {hi}]")
            if lo <= prev_hi:
                raise UsageError("runs must be disjoint and ascending")
            prev_hi = hi

    @property
    def total(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self.runs)

    @property
    def max_position(self) -> int:
        return self.runs[-1][1] if self.runs else 0

    def indices(self) -> Iterator[int]:
        for lo, hi in self.runs:
            yield from range(lo, hi + 1)

    @classmethod
    def prefix(cls, n: int) -> "PositionSet":
        """Positions 1..n (empty when n == 0)."""
        return cls(((1, n),) if n >= 1 else ())


def positions_from_interval_union(S: IntervalUnion, b: int, k: int) -> PositionSet:
    """The set of integer positions N ∩ b^k S, exactly.

    For an interval with open endpoints (l, r) the positions are the
    integers j with b^k l < j < b^k r; each closed endpoint turns the
    corresponding comparison non-strict.  Everything is integer/rational
    arithmetic, guarded so b^k * numerator stays far from overflow.
    """
    bk = b**k
    if bk > _MAX_BK:
        raise ResourceLimitError(f"b^k = {bk} exceeds position-arithmetic guard 2^50")
    runs = []
    for iv in S.intervals:
        for ep in (iv.lo, iv.hi):
            if ep.numerator > _MAX_ENDPOINT_NUMERATOR:
                raise ResourceLimitError(
                    f"endpoint numerator {ep.numerator} exceeds guard 2^20"
                )
        lo_scaled = iv.lo * bk
        hi_scaled = iv.hi * bk
        lo_floor = lo_scaled.numerator // lo_scaled.denominator
        hi_floor = hi_scaled.numerator // hi_scaled.denominator
        lo_exact = lo_scaled.denominator == 1
        hi_exact = hi_scaled.denominator == 1
        if iv.lo_closed:
            j_lo = lo_floor if lo_exact else lo_floor + 1
        else:
            j_lo = lo_floor + 1
        if iv.hi_closed:
            j_hi = hi_floor
        else:
            j_hi = hi_floor - 1 if hi_exact else hi_floor
        j_lo = max(j_lo, 1)
        if j_hi >= j_lo:
            runs.append((j_lo, j_hi))
    return PositionSet(tuple(runs))


# ---------------------------------------------------------------------------
# Histograms
# ---------------------------------------------------------------------------

@dataclass
class BlockHistogram:
    """Occurrence count per word code for one scan."""

    b: int
    k: int
    mode: str                       # "dense" | "sparse"
    n_positions: int
    dense: np.ndarray | None = None
    sparse: dict[int, int] | None = None

    @property
    def num_words(self) -> int:
        return self.b**self.k

    def count(self, code: int) -> int:
        if self.mode == "dense":
            return int(self.dense[code])
        return self.sparse.get(code, 0)

    def items(self) -> Iterator[tuple[int, int]]:
        """(code, count) pairs with count > 0, codes ascending."""
        if self.mode == "dense":
            for code in np.flatnonzero(self.dense):
                yield int(code), int(self.dense[code])
        else:
            for code in sorted(self.sparse):
                yield code, self.sparse[code]

    @property
    def total(self) -> int:
        if self.mode == "dense":
            return int(self.dense.sum())
        return sum(self.sparse.values())

    @property
    def distinct(self) -> int:
        if self.mode == "dense":
            return int(np.count_nonzero(self.dense))
        return len(self.sparse)


@dataclass
class CountsOfCounts:
    """Occupancy law of a histogram: table[i] = number of words occurring
    exactly i times, including the i=0 row for never-seen words."""

    b: int
    k: int
    n_positions: int
    table: dict[int, int]

    @property
    def num_words(self) -> int:
        return self.b**self.k

    def probability(self, i: int) -> Fraction:
        """Exact fraction of words occurring i times."""
        return Fraction(self.table.get(i, 0), self.num_words)

    def support(self) -> list[int]:
        return sorted(i for i, w in self.table.items() if w > 0)

    def check(self) -> None:
        assert sum(self.table.values()) == self.num_words
        assert sum(i * w for i, w in self.table.items()) == self.n_positions


def _symbols_from(source, needed: int, b: int) -> np.ndarray:
    if isinstance(source, SymbolSource):
        if source.alphabet.b != b:
            raise UsageError(f"source alphabet b={source.alphabet.b} != requested b={b}")
        return source.prefix(needed) if needed else np.empty(0, dtype=np.uint8)
    arr = np.asarray(source)
    if arr.size < needed:
        raise DataFormatError(
            f"prefix too short: {needed} symbols required, {arr.size} available"
        )
    Alphabet(b).validate(arr[:needed])
    return arr[:needed]


def _rolling_codes(x: np.ndarray, b: int, k: int) -> np.ndarray:
    """Code of the k-block starting at each position 1..len(x)-k+1."""
    m = x.size - k + 1
    codes = np.zeros(m, dtype=np.int64)
    for t in range(k):
        codes *= b
        codes += x[t : t + m].astype(np.int64)
    return codes


def count_blocks(
    source,
    b: int,
    k: int,
    positions: PositionSet,
    mem_cap_cells: int = DEFAULT_MEM_CAP_CELLS,
) -> BlockHistogram:
    """Histogram of k-block occurrences of ``source`` over ``positions``.

    ``source`` is a SymbolSource or a raw symbol array starting at position 1
    and must cover max(positions) + k - 1 symbols.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    bk = b**k
    if bk > _MAX_CODE:
        raise ResourceLimitError(f"b^k = {bk} exceeds the int64 code range")
    needed = positions.max_position + k - 1 if positions.runs else 0
    x = _symbols_from(source, needed, b)
    dense_mode = bk <= mem_cap_cells
    if not positions.runs:
        if dense_mode:
            return BlockHistogram(b, k, "dense", 0, dense=np.zeros(bk, dtype=np.int64))
        return BlockHistogram(b, k, "sparse", 0, sparse={})
    codes = _rolling_codes(x, b, k)
    if dense_mode:
        counts = np.zeros(bk, dtype=np.int64)
        for lo, hi in positions.runs:
            counts += np.bincount(codes[lo - 1 : hi], minlength=bk)
        return BlockHistogram(b, k, "dense", positions.total, dense=counts)
    table: dict[int, int] = {}
    for lo, hi in positions.runs:
        uniq, cnt = np.unique(codes[lo - 1 : hi], return_counts=True)
        for code, c in zip(uniq.tolist(), cnt.tolist()):
            table[code] = table.get(code, 0) + c
    return BlockHistogram(b, k, "sparse", positions.total, sparse=table)


def counts_of_counts(h: BlockHistogram) -> CountsOfCounts:
    """Derive the occupancy law i -> number of words occurring exactly i times."""
    if h.mode == "dense":
        occ = np.bincount(h.dense)
        table = {int(i): int(w) for i, w in enumerate(occ) if w}
    else:
        table = dict(Counter(h.sparse.values()))
        zero = h.num_words - len(h.sparse)
        if zero:
            table[0] = zero
    return CountsOfCounts(h.b, h.k, h.n_positions, table)


def z_statistic(source, b: int, k: int, lam, i: int) -> Fraction:
    """Exact fraction of the b^k words occurring exactly i times among
    positions 1..floor(lambda * b^k)."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    n = floor_scaled(lam, b, k)
    h = count_blocks(source, b, k, PositionSet.prefix(n))
    return counts_of_counts(h).probability(i)


def incremental_lambda_sweep(
    source,
    b: int,
    k: int,
    lambdas: Iterable,
    mem_cap_cells: int = DEFAULT_MEM_CAP_CELLS,
) -> list[CountsOfCounts]:
    """Counts-of-counts at every threshold floor(lambda_t * b^k), one pass.

    ``lambdas`` must be ascending and positive; each snapshot equals an
    independent scan at that lambda.
    """
    lams = [as_fraction(l) for l in lambdas]
    if not lams:
        raise UsageError("lambda sweep needs at least one value")
    if any(l <= 0 for l in lams):
        raise UsageError("sweep lambdas must be positive")
    if any(b_ < a for a, b_ in zip(lams, lams[1:])):
        raise UsageError("sweep lambdas must be ascending")
    bk = b**k
    if bk > _MAX_CODE:
        raise ResourceLimitError(f"b^k = {bk} exceeds the int64 code range")
    thresholds = [floor_scaled(l, b, k) for l in lams]
    n_max = thresholds[-1]
    needed = n_max + k - 1 if n_max else 0
    x = _symbols_from(source, needed, b)
    codes = _rolling_codes(x, b, k) if n_max else np.empty(0, dtype=np.int64)

    out: list[CountsOfCounts] = []
    dense_mode = bk <= mem_cap_cells
    if dense_mode:
        counts = np.zeros(bk, dtype=np.int64)
        prev = 0
        for n in thresholds:
            if n > prev:
                counts += np.bincount(codes[prev:n], minlength=bk)
                prev = n
            occ = np.bincount(counts)
            table = {int(i): int(w) for i, w in enumerate(occ) if w}
            out.append(CountsOfCounts(b, k, n, table))
    else:
        sparse: dict[int, int] = {}
        prev = 0
        for n in thresholds:
            if n > prev:
                uniq, cnt = np.unique(codes[prev:n], return_counts=True)
                for code, c in zip(uniq.tolist(), cnt.tolist()):
                    sparse[code] = sparse.get(code, 0) + c
                prev = n
            table = dict(Counter(sparse.values()))
            zero = bk - len(sparse)
            if zero:
                table[0] = zero
            out.append(CountsOfCounts(b, k, n, table))
    return out


# ---------------------------------------------------------------------------
# Debug/golden dump formats
# ---------------------------------------------------------------------------

def write_histogram_csv(h: BlockHistogram, path) -> None:
    """CSV 'code,count', codes ascending, zero-count words omitted."""
    with open(path, "w") as fh:
        fh.write("code,count\n")
        for code, count in h.items():
            fh.write(f"{code},{count}\n")


def write_counts_of_counts_csv(coc: CountsOfCounts, path) -> None:
    """CSV 'i,words', i ascending."""
    with open(path, "w") as fh:
        fh.write("i,words\n")
        for i in sorted(coc.table):
            fh.write(f"{i},{coc.table[i]}\n")
