"""Reference laws and empirical-versus-Poisson comparison.

Probability mass functions are evaluated in log space so indices up to the
full word count never overflow a factorial.  Empirical occupancy laws carry
exact rational probabilities (word counts over b^k); floats appear only
when a law is compared against a Poisson reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from scipy import special as sps

from .blockcount import (
    CountsOfCounts,
    IntervalUnion,
    as_fraction,
    count_blocks,
    counts_of_counts,
    incremental_lambda_sweep,
    positions_from_interval_union,
)
from .errors import UsageError

_BINOM_SUM_CUTOFF = 10_000


def poisson_pmf(lam: float, i: int) -> float:
    """P(Poisson(lam) = i) = exp(-lam) lam^i / i!, evaluated as
    exp(-lam + i ln lam - lnGamma(i+1))."""
    lam = float(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    if i < 0:
        raise UsageError(f"i must be >= 0, got {i}")
    if i == 0:
        return math.exp(-lam)
    return math.exp(-lam + i * math.log(lam) - math.lgamma(i + 1))


def poisson_sf(lam: float, i: int) -> float:
    """P(Poisson(lam) > i), the analytic tail beyond i."""
    return float(sps.pdtrc(i, float(lam)))


def binomial_pmf(N: int, p: float, i: int) -> float:
    """P(Binomial(N, p) = i) in log space.

    The log binomial coefficient is accumulated as sum_{t=1..i}
    [ln(N-i+t) - ln t], which keeps the relative error near machine
    precision even for N ~ 1e9 where an lgamma difference loses digits.
    Far from either end of the support (min(i, N-i) > 1e4) the evaluation
    falls back to scipy's saddle-point pmf.
    """
    if not 0 <= i <= N:
        raise UsageError(f"need 0 <= i <= N, got i={i}, N={N}")
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"need 0 <= p <= 1, got p={p}")
    if p == 0.0:
        return 1.0 if i == 0 else 0.0
    if p == 1.0:
        return 1.0 if i == N else 0.0
    if min(i, N - i) > _BINOM_SUM_CUTOFF:
        from scipy import stats as sstats

        return float(sstats.binom.pmf(i, N, p))
    j = min(i, N - i)
    log_comb = math.fsum(math.log(N - j + t) - math.log(t) for t in range(1, j + 1))
    return math.exp(log_comb + i * math.log(p) + (N - i) * math.log1p(-p))


@dataclass(frozen=True)
class PoissonLaw:
    """Poisson reference with float rate; the exact rational is kept for
    provenance when the rate came from a lambda threshold."""

    lam: float
    lam_exact: Fraction | None = None

    def __post_init__(self):
        if self.lam <= 0:
            raise UsageError(f"Poisson rate must be positive, got {self.lam}")

    @classmethod
    def from_rational(cls, lam) -> "PoissonLaw":
        f = as_fraction(lam)
        return cls(float(f), f)

    def pmf(self, i: int) -> float:
        return poisson_pmf(self.lam, i)

    def sf(self, i: int) -> float:
        return poisson_sf(self.lam, i)


@dataclass
class EmpiricalLaw:
    """Finite-support law with exact rational probabilities."""

    b: int
    k: int
    probs: dict[int, Fraction]

    @classmethod
    def from_counts_of_counts(cls, coc: CountsOfCounts) -> "EmpiricalLaw":
        bk = coc.num_words
        return cls(coc.b, coc.k, {i: Fraction(w, bk) for i, w in coc.table.items() if w})

    def probability(self, i: int) -> Fraction:
        return self.probs.get(i, Fraction(0))

    @property
    def i_max(self) -> int:
        return max(self.probs) if self.probs else 0

    def check(self) -> None:
        assert sum(self.probs.values(), Fraction(0)) == 1


def tv_distance(e: EmpiricalLaw, p: PoissonLaw) -> float:
    """Total variation distance between an empirical law and a Poisson law.

    Half the L1 difference over 0..i_max plus half the analytic Poisson tail
    mass beyond i_max, which the finite support cannot match.
    """
    i_max = e.i_max
    body = math.fsum(
        abs(float(e.probability(i)) - p.pmf(i)) for i in range(i_max + 1)
    )
    return 0.5 * (body + p.sf(i_max))


def tv_between(e1: EmpiricalLaw, e2: EmpiricalLaw) -> Fraction:
    """Exact total variation distance between two finite-support laws."""
    support = set(e1.probs) | set(e2.probs)
    acc = sum((abs(e1.probability(i) - e2.probability(i)) for i in support), Fraction(0))
    return acc / 2


@dataclass(frozen=True)
class SupDeviation:
    i: int
    value: float


def sup_deviation(e: EmpiricalLaw, p: PoissonLaw, i_range: Iterable[int] | None = None) -> SupDeviation:
    """Argmax and max of |empirical(i) - pmf(i)| over ``i_range``.

    Defaults to 0..max(8, empirical support max); ties break toward the
    smaller index.
    """
    if i_range is None:
        i_range = range(0, max(8, e.i_max) + 1)
    best_i, best = None, -1.0
    for i in i_range:
        dev = abs(float(e.probability(i)) - p.pmf(i))
        if dev > best:
            best_i, best = i, dev
    if best_i is None:
        raise UsageError("empty index range")
    return SupDeviation(best_i, best)


@dataclass(frozen=True)
class KallenbergRow:
    k: int
    mean: Fraction               # E-hat[M(S)] = positions / b^k, exact
    mean_gap: float              # mean - |S|
    p_zero: Fraction             # empirical P(M(S) = 0), exact
    p_zero_target: float         # e^{-|S|}
    p_zero_gap: float


@dataclass(frozen=True)
class KallenbergReport:
    S: IntervalUnion
    rows: tuple[KallenbergRow, ...]


def kallenberg_diagnostic(source, b: int, S: IntervalUnion, k_range: Sequence[int], **scan_kwargs) -> KallenbergReport:
    """Empirical check of the two Poisson-process convergence conditions.

    Per k: (1) the mean count over S against the Lebesgue measure |S| and
    (2) the empirical probability of a zero count against e^{-|S|}.  Raw
    gaps are reported; no verdict is attached.
    """
    measure = S.measure
    target0 = math.exp(-float(measure))
    rows = []
    for k in k_range:
        positions = positions_from_interval_union(S, b, k)
        h = count_blocks(source, b, k, positions, **scan_kwargs)
        coc = counts_of_counts(h)
        mean = Fraction(h.total, h.num_words)
        p0 = coc.probability(0)
        rows.append(
            KallenbergRow(
                k=k,
                mean=mean,
                mean_gap=float(mean - measure),
                p_zero=p0,
                p_zero_target=target0,
                p_zero_gap=float(p0) - target0,
            )
        )
    return KallenbergReport(S, tuple(rows))


@dataclass(frozen=True)
class ContinuityGap:
    gap: Fraction       # exact TV between the two occupancy laws
    bound: float        # lam2 - lam1 + 2 b^-k


def lambda_continuity_gap(source, b: int, k: int, lam, lam2, **scan_kwargs) -> ContinuityGap:
    """Empirical TV distance between the occupancy laws at two thresholds,
    with the analytic continuity bound (lam2 - lam1) + 2 b^-k."""
    f1, f2 = as_fraction(lam), as_fraction(lam2)
    if not 0 < f1 <= f2:
        raise UsageError(f"need 0 < lambda <= lambda', got {f1}, {f2}")
    snaps = incremental_lambda_sweep(source, b, k, [f1, f2], **scan_kwargs)
    e1 = EmpiricalLaw.from_counts_of_counts(snaps[0])
    e2 = EmpiricalLaw.from_counts_of_counts(snaps[1])
    bound = float(f2 - f1) + 2.0 * float(b) ** (-k)
    return ContinuityGap(tv_between(e1, e2), bound)
