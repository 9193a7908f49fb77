"""Closed-form bound evaluation.

Every function evaluates one explicit inequality: the dependency-graph
total-variation bound for block counts over a rational interval union, the
prefix-set specialization of that bound, McDiarmid's concentration
inequality with the block-count Lipschitz parameters, the per-(lambda, i)
tail bound, and the summable measure bound for the deviation sets.

Values are 64-bit floats computed from exact integer/rational intermediates.
Exponents like -2 b^k / k^5 underflow quickly; the evaluators then return
0.0 with an ``underflow`` flag instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .blockcount import as_fraction
from .errors import UsageError

_LOG_MIN_SUBNORMAL = -745.2


def _exp_flagged(arg: float) -> tuple[float, bool]:
    if arg < _LOG_MIN_SUBNORMAL:
        return 0.0, True
    value = math.exp(arg)
    return value, value == 0.0


@dataclass(frozen=True)
class JansonBound:
    """``final`` is the fully expanded bound (|S| b^k + n) b^-2k (1 + 4k);
    ``shell`` keeps the min{1, |S|^-1} prefactor of the generic statement."""

    final: float
    shell: float


def janson_tv_bound(S_measure, n: int, b: int, k: int) -> JansonBound:
    """Dependency-graph TV bound for the count over a union of ``n``
    rational intervals with total measure ``S_measure``.

    Positions i, j interact only when |i - j| < k; each indicator has mean
    b^-k and each interacting pair has joint mean b^-2k, exactly as if
    independent, which gives (|S| b^k + n) b^-2k + (|S| b^k + n) 2k 2 b^-2k.
    """
    measure = as_fraction(S_measure)
    if measure <= 0:
        raise UsageError(f"|S| must be positive, got {measure}")
    if n < 1:
        raise UsageError(f"a union has at least one interval, got n={n}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    final = (measure * b**k + n) * Fraction(1, b ** (2 * k)) * (1 + 4 * k)
    shell = min(Fraction(1), 1 / measure) * final
    return JansonBound(float(final), float(shell))


@dataclass(frozen=True)
class AnnealedBound:
    value: float
    below_one_over_k: bool


def annealed_tv_bound(lam, b: int, k: int) -> AnnealedBound:
    """TV bound (lambda + 1) 5k b^-k for the prefix set (0, lambda], with a
    flag for whether it is already below 1/k."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    exact = (lam + 1) * 5 * k * Fraction(1, b**k)
    return AnnealedBound(float(exact), exact < Fraction(1, k))


def mcdiarmid_bound(N: int, c: float, t: float) -> float:
    """2 exp(-2 t^2 / (N c^2)) for an N-coordinate function with
    per-coordinate influence at most c."""
    if N < 1:
        raise UsageError(f"N must be >= 1, got {N}")
    if not c > 0:
        raise UsageError(f"c must be positive, got {c}")
    if t < 0:
        raise UsageError(f"t must be >= 0, got {t}")
    value, _ = _exp_flagged(-2.0 * float(t) ** 2 / (N * float(c) ** 2))
    return 2.0 * value


@dataclass(frozen=True)
class QuenchedParameters:
    """McDiarmid inputs for the block-count occupancy statistic: the
    coordinate count is rounded up to ceil(|S| b^k) + n k, which can only
    loosen the resulting probability bound."""

    N: int
    c: Fraction
    t: Fraction


def quenched_parameters(S_measure, n: int, b: int, k: int) -> QuenchedParameters:
    measure = as_fraction(S_measure)
    if measure <= 0:
        raise UsageError(f"|S| must be positive, got {measure}")
    if n < 1 or k < 1:
        raise UsageError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    scaled = measure * b**k
    N = -((-scaled.numerator) // scaled.denominator) + n * k  # ceil + nk
    return QuenchedParameters(N, Fraction(k, b**k), Fraction(1, k))


def k0_threshold(lam) -> int:
    """max{24, ceil(2 log2(lambda + 1))}, the k from which the tail bound is
    asserted.  The ceiling is exact: it is the least integer m with
    (lambda + 1)^2 <= 2^m."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    x2 = (lam + 1) ** 2
    m = max(0, math.floor(2 * math.log2(float(lam + 1))) - 2)
    while 2**m < x2:
        m += 1
    return max(24, m)


@dataclass(frozen=True)
class TailBound:
    k0: int
    value: float
    asserted: bool          # False when k < k0: the bound is not claimed there
    underflow: bool


def tail_bound(b: int, lam, k: int) -> TailBound:
    """exp(-2 b^k / (lambda k^4)) together with the k0 threshold below which
    the inequality is not asserted."""
    lam = as_fraction(lam)
    if lam <= 0:
        raise UsageError(f"lambda must be positive, got {lam}")
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    k0 = k0_threshold(lam)
    arg = float(Fraction(-2 * b**k) / (lam * k**4))
    value, under = _exp_flagged(arg)
    return TailBound(k0, value, k >= k0, under)


@dataclass(frozen=True)
class OkMeasureBound:
    value: float
    asserted: bool          # the derivation starts at k = 24
    underflow: bool


def o_k_measure_bound(b: int, k: int) -> OkMeasureBound:
    """2 b^k k^3 exp(-2 b^k / k^5), the per-k measure bound on the union of
    all deviation sets at block length k."""
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    bk = b**k
    arg = float(Fraction(-2 * bk, k**5))
    if bk <= 1 << 53:
        value, under = _exp_flagged(arg)
        value *= 2.0 * bk * k**3
    else:
        log_pref = math.log(2.0) + k * math.log(b) + 3.0 * math.log(k)
        value, under = _exp_flagged(log_pref + arg)
    return OkMeasureBound(value, k >= 24, under or value == 0.0)


def o_k_measure_partial_sum(b: int, k_hi: int, k_lo: int = 24) -> float:
    """sum_{k=k_lo..k_hi} of the per-k measure bounds, for tail budgeting."""
    if k_hi < k_lo:
        return 0.0
    return math.fsum(o_k_measure_bound(b, k).value for k in range(k_lo, k_hi + 1))
