"""Desk-scale evaluation of the deviation test sets.

For block length k the test examines every rational rate lambda in the grid
L_k = {p/q : q in 1..k, p >= 1, p/q < k} and every occupancy index
i in J_k = {0, .., b^k - 1}: a prefix lands in the deviation set for
(lambda, k, i) when its empirical occupancy probability differs from the
Poisson pmf by more than 2/k.  Membership in the union O_k over the whole
grid is decided exactly from a finite prefix; the tail unions T_m can only
ever be examined partially, and reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .blockcount import (
    PositionSet,
    as_fraction,
    count_blocks,
    counts_of_counts,
    floor_scaled,
    incremental_lambda_sweep,
)
from .errors import DataFormatError, ResourceLimitError, UsageError
from .seqgen import SymbolSource
from .stats import poisson_pmf


@dataclass(frozen=True)
class MltestConfig:
    """Resource caps; exceeding one raises instead of silently truncating."""

    max_prefix: int = 1 << 31
    max_scan_positions: int = 1 << 20   # cap on k * b^k (k <= 16 at b = 2)


DEFAULT_CONFIG = MltestConfig()


@dataclass(frozen=True)
class BadWitness:
    lam: Fraction
    i: int
    deviation: float
    threshold: float


@dataclass(frozen=True)
class OkResult:
    b: int
    k: int
    member: bool
    witnesses: tuple[BadWitness, ...]


def enumerate_L_k(k: int) -> list[Fraction]:
    """The rational grid {p/q : q in 1..k, p >= 1, p/q < k}, reduced,
    deduplicated, ascending.  Empty for k = 1."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    grid = {Fraction(p, q) for q in range(1, k + 1) for p in range(1, k * q)}
    return sorted(grid)


def max_lambda(k: int) -> Fraction:
    """Largest grid element, k - 1/k (defined for k >= 2)."""
    return Fraction(k * k - 1, k)


def required_prefix_length(b: int, k: int) -> int:
    """Symbols needed to decide O_k membership: floor(max(L_k) b^k) + k - 1."""
    if k < 2:
        return 0
    return floor_scaled(max_lambda(k), b, k) + k - 1


def _as_prefix(prefix, needed: int) -> np.ndarray:
    if isinstance(prefix, SymbolSource):
        return prefix.prefix(needed)
    arr = np.asarray(prefix)
    if arr.size < needed:
        raise DataFormatError(
            f"prefix too short: {needed} symbols required, {arr.size} available"
        )
    return arr


def bad_membership(prefix, b: int, k: int, lam, i: int) -> tuple[bool, float]:
    """Whether the prefix's occupancy probability at index i deviates from
    the Poisson pmf by more than 2/k at rate lambda; returns the deviation.

    Membership depends only on positions 1..floor(lambda b^k), so the answer
    is exact for any sufficiently long prefix.
    """
    lam = as_fraction(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    n = floor_scaled(lam, b, k)
    x = _as_prefix(prefix, n + k - 1)
    coc = counts_of_counts(count_blocks(x, b, k, PositionSet.prefix(n)))
    deviation = abs(float(coc.probability(i)) - poisson_pmf(float(lam), i))
    return deviation > 2.0 / k, deviation


def _pmf_exceeding(lam: float, threshold: float, i_cap: int) -> list[int]:
    """Indices i <= i_cap with poisson_pmf(lam, i) > threshold.

    The pmf is unimodal with mode floor(lam), so the scan stops at the first
    sub-threshold index past the mode.
    """
    mode = int(math.floor(lam))
    out = []
    i = 0
    while i <= i_cap:
        if poisson_pmf(lam, i) > threshold:
            out.append(i)
        elif i > mode:
            break
        i += 1
    return out


def o_k_membership(
    prefix,
    b: int,
    k: int,
    config: MltestConfig = DEFAULT_CONFIG,
) -> OkResult:
    """Exact membership of the prefix in O_k, the union of deviation sets
    over all grid rates L_k and all occupancy indices J_k = {0..b^k - 1}.

    One incremental sweep produces the occupancy law at every grid rate.
    Indices are never enumerated exhaustively: only the observed occupancy
    counts plus the analytic range where the pmf itself exceeds 2/k can
    produce a deviation above 2/k.
    """
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    grid = enumerate_L_k(k)
    if not grid:
        return OkResult(b, k, False, ())
    if k * b**k > config.max_scan_positions:
        raise ResourceLimitError(
            f"k={k} at b={b} needs ~{k * b**k} scan positions, "
            f"cap is {config.max_scan_positions}"
        )
    needed = required_prefix_length(b, k)
    if needed > config.max_prefix:
        raise ResourceLimitError(
            f"required prefix {needed} exceeds cap {config.max_prefix}"
        )
    x = _as_prefix(prefix, needed)
    threshold = 2.0 / k
    i_cap = b**k - 1
    witnesses: list[BadWitness] = []
    snapshots = incremental_lambda_sweep(x, b, k, grid)
    for lam, coc in zip(grid, snapshots):
        lam_f = float(lam)
        candidates = set(coc.support()) | set(_pmf_exceeding(lam_f, threshold, i_cap))
        for i in sorted(candidates):
            if i > i_cap:
                continue
            deviation = abs(float(coc.probability(i)) - poisson_pmf(lam_f, i))
            if deviation > threshold:
                witnesses.append(BadWitness(lam, i, deviation, threshold))
    return OkResult(b, k, bool(witnesses), tuple(witnesses))


@dataclass(frozen=True)
class TmRow:
    k: int
    member: bool
    witnesses: tuple[BadWitness, ...]


@dataclass(frozen=True)
class TmReport:
    """Membership evidence for the tail union starting at m + k0.

    Always PARTIAL: a finite scan can demonstrate membership but can never
    certify that the sequence avoids every deviation set beyond k_max.
    """

    m: int
    k0: int
    k_max: int
    rows: tuple[TmRow, ...]
    partial: bool = True

    @property
    def any_member(self) -> bool:
        return any(r.member for r in self.rows)

    @property
    def verdict(self) -> str:
        if not self.rows:
            return "no k examined"
        if self.any_member:
            return "member of some examined O_k"
        return "no membership found (PARTIAL: ks beyond k_max unexamined)"


def _largest_feasible_k(b: int, available: int, config: MltestConfig) -> int:
    k = 0
    while True:
        nxt = k + 1
        if nxt * b**nxt > config.max_scan_positions:
            break
        if required_prefix_length(b, nxt) > min(available, config.max_prefix):
            break
        k = nxt
    return k


def t_m_report(
    prefix,
    b: int,
    m: int,
    k_max: int,
    k0: int = 24,
    config: MltestConfig = DEFAULT_CONFIG,
) -> TmReport:
    """Examine O_k for every k in [m + k0, k_max].

    ``k0`` defaults to the tail-union offset 24; it is exposed so small
    desk-scale ranges can be exercised.  An infeasible k in the range raises
    a resource error naming the largest feasible block length.
    """
    if m < 1:
        raise UsageError(f"m must be >= 1, got {m}")
    ks = range(m + k0, k_max + 1)
    if len(ks) == 0:
        return TmReport(m, k0, k_max, ())
    if isinstance(prefix, SymbolSource):
        available = config.max_prefix
    else:
        available = np.asarray(prefix).size
    infeasible = [
        k
        for k in ks
        if k * b**k > config.max_scan_positions
        or required_prefix_length(b, k) > min(available, config.max_prefix)
    ]
    if infeasible:
        feasible = _largest_feasible_k(b, available, config)
        raise ResourceLimitError(
            f"k={infeasible[0]} infeasible under current caps/prefix; "
            f"largest feasible k is {feasible}"
        )
    rows = []
    for k in ks:
        res = o_k_membership(prefix, b, k, config)
        rows.append(TmRow(k, res.member, res.witnesses))
    return TmReport(m, k0, k_max, tuple(rows))
