"""Greedy construction of prefixes with small occupancy deviations.

This is an engineering heuristic, not a certified construction: no finite
procedure can certify the limit property the deviations measure.  The
builder grows a prefix one symbol at a time, keeping live occurrence
counters for every tracked block length and scoring candidate symbols by a
weighted sum of |empirical occupancy - Poisson pmf| terms.

Scoring works against rate checkpoints: for each tracked k the occupancy
law is compared to Poisson(rho) where rho is the current number of scanned
positions over b^k.  When rho crosses a grid rate (default 1/2, 1, 3/2, 2)
the deviation at that checkpoint freezes into the penalty, so early
mistakes keep costing; between checkpoints the live law is compared to the
moving target, which gives the greedy step a signal from the first symbol.
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
)
from .errors import ResourceLimitError, UsageError
from .stats import EmpiricalLaw, PoissonLaw, poisson_pmf, sup_deviation

_MAX_TRACKED_CELLS = 1 << 24

DEFAULT_LAMBDA_GRID = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2))
DEFAULT_I_CAP = 8


@dataclass(frozen=True)
class SynthConfig:
    b: int
    k_lo: int
    k_hi: int
    lambda_grid: tuple[Fraction, ...] = DEFAULT_LAMBDA_GRID
    i_cap: int = DEFAULT_I_CAP
    weights: tuple[float, ...] | None = None   # per-i weights, default all 1

    def __post_init__(self):
        if self.b < 2 or not 1 <= self.k_lo <= self.k_hi:
            raise UsageError("need b >= 2 and 1 <= k_lo <= k_hi")
        lams = [as_fraction(l) for l in self.lambda_grid]
        if any(l <= 0 for l in lams) or sorted(lams) != lams:
            raise UsageError("lambda grid must be positive and ascending")
        cells = sum(self.b**k for k in range(self.k_lo, self.k_hi + 1))
        if cells > _MAX_TRACKED_CELLS:
            raise ResourceLimitError(
                f"tracking {cells} counter cells exceeds cap {_MAX_TRACKED_CELLS}"
            )

    def weight(self, i: int) -> float:
        if self.weights is None:
            return 1.0
        return self.weights[i] if i < len(self.weights) else self.weights[-1]


class _KTracker:
    """Live counters for one block length: rolling window code, dense
    occurrence counts, and the counts-of-counts table."""

    def __init__(self, b: int, k: int):
        self.b = b
        self.k = k
        self.bk = b**k
        self.mod = b ** (k - 1)
        self.window = 0          # code of the trailing min(T, k-1) symbols
        self.n_blocks = 0
        self.counts = np.zeros(self.bk, dtype=np.int64)
        self.coc: dict[int, int] = {0: self.bk}

    def _coc_move(self, old: int, new: int) -> None:
        c = self.coc[old] - 1
        if c:
            self.coc[old] = c
        else:
            del self.coc[old]
        self.coc[new] = self.coc.get(new, 0) + 1

    def push(self, s: int, length_before: int) -> tuple[int, int]:
        """Append symbol s; returns an undo token (window_before, code|-1)."""
        token = (self.window, -1)
        if length_before + 1 >= self.k:
            code = self.window * self.b + s
            old = int(self.counts[code])
            self.counts[code] = old + 1
            self._coc_move(old, old + 1)
            self.n_blocks += 1
            self.window = code % self.mod
            return (token[0], code)
        self.window = self.window * self.b + s
        return token

    def pop(self, token: tuple[int, int]) -> None:
        window_before, code = token
        if code >= 0:
            old = int(self.counts[code])
            self.counts[code] = old - 1
            self._coc_move(old, old - 1)
            self.n_blocks -= 1
        self.window = window_before

    def deviation(self, rho: float, i_cap: int, weight) -> float:
        if self.n_blocks == 0:
            return 0.0
        total = 0.0
        for i in range(i_cap + 1):
            e = self.coc.get(i, 0) / self.bk
            total += weight(i) * abs(e - poisson_pmf(rho, i))
        return total


class SynthState:
    """Prefix under construction plus live counters for each tracked k."""

    def __init__(self, config: SynthConfig):
        self.config = config
        self.symbols: list[int] = []
        self.trackers = {
            k: _KTracker(config.b, k) for k in range(config.k_lo, config.k_hi + 1)
        }
        # checkpoint thresholds per k, ascending block counts
        self._checkpoints = {
            k: [floor_scaled(l, config.b, k) for l in config.lambda_grid]
            for k in self.trackers
        }
        self._frozen: dict[int, list[float]] = {k: [] for k in self.trackers}

    def __len__(self) -> int:
        return len(self.symbols)

    def prefix_array(self) -> np.ndarray:
        return np.array(self.symbols, dtype=np.int64)

    def _push(self, s: int):
        tokens = {}
        frozen_added = {}
        n = len(self.symbols)
        for k, tr in self.trackers.items():
            tokens[k] = tr.push(s, n)
            cps = self._checkpoints[k]
            done = len(self._frozen[k])
            if done < len(cps) and tr.n_blocks == cps[done] and cps[done] > 0:
                rho = tr.n_blocks / tr.bk
                self._frozen[k].append(
                    tr.deviation(rho, self.config.i_cap, self.config.weight)
                )
                frozen_added[k] = True
        self.symbols.append(s)
        return tokens, frozen_added

    def _pop(self, undo) -> None:
        tokens, frozen_added = undo
        self.symbols.pop()
        for k, tr in self.trackers.items():
            if frozen_added.get(k):
                self._frozen[k].pop()
            tr.pop(tokens[k])

    def append(self, s: int) -> None:
        """Commit one symbol."""
        if not 0 <= s < self.config.b:
            raise UsageError(f"symbol {s} outside alphabet 0..{self.config.b - 1}")
        self._push(s)

    def penalty(self) -> float:
        """Frozen checkpoint deviations plus the live deviation per tracked k."""
        total = 0.0
        for k, tr in self.trackers.items():
            total += math.fsum(self._frozen[k])
            if tr.n_blocks:
                total += tr.deviation(
                    tr.n_blocks / tr.bk, self.config.i_cap, self.config.weight
                )
        return total

    def verify_counters(self) -> None:
        """Recount the prefix from scratch and compare with live counters."""
        arr = self.prefix_array()
        for k, tr in self.trackers.items():
            n = max(0, arr.size - k + 1)
            fresh = count_blocks(arr, self.config.b, k, PositionSet.prefix(n))
            assert np.array_equal(fresh.dense, tr.counts), f"counter drift at k={k}"
            assert counts_of_counts(fresh).table == tr.coc, f"coc drift at k={k}"
            assert fresh.total == tr.n_blocks


def new_state(config: SynthConfig) -> SynthState:
    return SynthState(config)


def greedy_extend(
    state: SynthState,
    steps: int,
    beam_width: int = 1,
    lookahead: int = 1,
) -> SynthState:
    """Extend the prefix by ``steps`` symbols, committing one per step.

    Candidate first symbols are ranked by the penalty after a beam search
    over the next ``lookahead`` symbols keeping ``beam_width`` partial
    extensions per level.  Ties break toward the lexicographically smallest
    extension, so the construction is fully deterministic.
    """
    if steps < 1 or beam_width < 1 or lookahead < 1:
        raise UsageError("steps, beam_width, lookahead must all be >= 1")
    b = state.config.b
    for _ in range(steps):
        beam: list[tuple[float, tuple[int, ...]]] = []
        for s in range(b):
            undo = state._push(s)
            beam.append((state.penalty(), (s,)))
            state._pop(undo)
        for _depth in range(1, lookahead):
            beam.sort(key=lambda item: (item[0], item[1]))
            grown: list[tuple[float, tuple[int, ...]]] = []
            for _, path in beam[:beam_width]:
                undos = [state._push(sym) for sym in path]
                for s in range(b):
                    undo = state._push(s)
                    grown.append((state.penalty(), path + (s,)))
                    state._pop(undo)
                for undo in reversed(undos):
                    state._pop(undo)
            beam = grown
        best = min(beam, key=lambda item: (item[0], item[1]))
        state.append(best[1][0])
    return state


@dataclass(frozen=True)
class ScoreRow:
    k: int
    lam: Fraction
    status: str                 # "ok" | "insufficient length"
    required: int
    sup_i: int | None = None
    sup_deviation: float | None = None
    penalty: float | None = None


def score_prefix(
    prefix,
    b: int,
    k_set: Sequence[int],
    lambda_grid: Sequence = DEFAULT_LAMBDA_GRID,
    i_cap: int = DEFAULT_I_CAP,
    weights: tuple[float, ...] | None = None,
) -> list[ScoreRow]:
    """Offline deviation report for a finished prefix.

    Per (k, lambda): the max |empirical(i) - pmf(i)| over i <= i_cap (the
    same value the stats layer reports) and the weighted penalty sum.
    Pairs needing more symbols than available get an explicit
    "insufficient length" row.
    """
    arr = np.asarray(prefix)
    if arr.size == 0:
        raise UsageError("empty prefix has no positions to score")
    cfg_weight = (lambda i: 1.0) if weights is None else (
        lambda i: weights[i] if i < len(weights) else weights[-1]
    )
    rows = []
    for k in k_set:
        for lam in lambda_grid:
            lam = as_fraction(lam)
            n = floor_scaled(lam, b, k)
            required = n + k - 1
            if arr.size < required:
                rows.append(ScoreRow(k, lam, "insufficient length", required))
                continue
            coc = counts_of_counts(count_blocks(arr, b, k, PositionSet.prefix(n)))
            law = EmpiricalLaw.from_counts_of_counts(coc)
            ref = PoissonLaw.from_rational(lam)
            sd = sup_deviation(law, ref, range(i_cap + 1))
            pen = math.fsum(
                cfg_weight(i) * abs(float(law.probability(i)) - ref.pmf(i))
                for i in range(i_cap + 1)
            )
            rows.append(ScoreRow(k, lam, "ok", required, sd.i, sd.value, pen))
    return rows
