import math
from fractions import Fraction

import mpmath as mp
import pytest

from helpers import overlap_enumeration
from pgen.bounds import (
    annealed_tv_bound,
    janson_tv_bound,
    k0_threshold,
    mcdiarmid_bound,
    o_k_measure_bound,
    o_k_measure_partial_sum,
    quenched_parameters,
    tail_bound,
)
from pgen.errors import UsageError

mp.mp.dps = 50


# ---------------------------------------------------------------------------
# Dependency-graph TV bound
# ---------------------------------------------------------------------------

def test_janson_plugin_value():
    got = janson_tv_bound(1, 1, 2, 10)
    expected = (2**10 + 1) * (1 + 4 * 10) / 2**20
    assert got.final == pytest.approx(expected, rel=1e-15)
    assert got.shell == got.final  # |S| = 1 makes the rate factor 1


def test_janson_shell_rate_factor():
    got = janson_tv_bound(2, 1, 2, 10)
    assert got.shell == pytest.approx(got.final / 2, rel=1e-15)
    small = janson_tv_bound(Fraction(1, 2), 1, 2, 10)
    assert small.shell == small.final  # min{1, 1/|S|} capped at 1


def test_janson_decreasing_in_k():
    values = [janson_tv_bound(1, 1, 2, k).final for k in range(5, 30)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_janson_preconditions():
    with pytest.raises(UsageError):
        janson_tv_bound(1, 0, 2, 10)
    with pytest.raises(UsageError):
        janson_tv_bound(0, 1, 2, 10)


def test_overlap_identity_exhaustive():
    # every pair (prefix, word) over prefixes of length 9: the joint
    # occurrence probability at positions 1 and 2 equals b^-2k exactly,
    # as if the indicators were independent, and each marginal is b^-k
    joint, marg_i, marg_j = overlap_enumeration(b=2, k=3, i=1, j=2, prefix_len=9)
    assert joint == Fraction(1, 2**6)
    assert marg_i == Fraction(1, 2**3)
    assert marg_j == Fraction(1, 2**3)


# ---------------------------------------------------------------------------
# Prefix-set TV bound
# ---------------------------------------------------------------------------

def test_annealed_plugin_values():
    got = annealed_tv_bound(1, 2, 24)
    assert got.value == pytest.approx(2 * 120 / 2**24, rel=1e-15)
    assert got.value == pytest.approx(1.430511474609375e-05, rel=1e-12)
    assert got.below_one_over_k

    low = annealed_tv_bound(1, 2, 4)
    assert low.value == pytest.approx(2.5, rel=1e-15)
    assert not low.below_one_over_k


def test_annealed_linear_in_rate_plus_one():
    base = annealed_tv_bound(1, 2, 12).value
    assert annealed_tv_bound(3, 2, 12).value == pytest.approx(2 * base, rel=1e-14)
    assert annealed_tv_bound(7, 2, 12).value == pytest.approx(4 * base, rel=1e-14)


# ---------------------------------------------------------------------------
# McDiarmid
# ---------------------------------------------------------------------------

def test_mcdiarmid_at_zero_deviation():
    assert mcdiarmid_bound(100, 0.1, 0.0) == 2.0


def test_mcdiarmid_plugin_value():
    assert mcdiarmid_bound(100, 0.1, 0.1) == pytest.approx(2 * math.exp(-0.02), rel=1e-14)


def test_mcdiarmid_doubling_identity():
    # bound(2t) = 2 (bound(t)/2)^4 since the exponent scales with t^2
    n, c, t = 50, 0.2, 0.05
    assert mcdiarmid_bound(n, c, 2 * t) == pytest.approx(
        2 * (mcdiarmid_bound(n, c, t) / 2) ** 4, rel=1e-12
    )


def test_mcdiarmid_monotonicity():
    ts = [0.01 * j for j in range(1, 20)]
    vals = [mcdiarmid_bound(100, 0.1, t) for t in ts]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    cs = [0.01 * j for j in range(1, 20)]
    vals = [mcdiarmid_bound(100, c, 0.1) for c in cs]
    assert all(a < b for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# Quenched parameters
# ---------------------------------------------------------------------------

def test_quenched_parameters_plugin():
    qp = quenched_parameters(1, 1, 2, 10)
    assert (qp.N, qp.c, qp.t) == (1034, Fraction(10, 1024), Fraction(1, 10))


def test_quenched_small_measure_limit():
    qp = quenched_parameters(Fraction(1, 2**20), 1, 2, 10)
    assert qp.N == 1 + 10  # ceil of a tiny positive measure, plus n*k


def test_quenched_bound_vs_expanded_summand():
    # the rounded-up coordinate count keeps the evaluated bound below the
    # fully expanded form 2 exp(-k^-4 b^k / (|S| + 2 n k b^-k))
    for k in range(8, 26, 2):
        for measure in (Fraction(1), Fraction(3, 2), Fraction(1, 2)):
            for n in (1, 2, 3):
                qp = quenched_parameters(measure, n, 2, k)
                mine = mcdiarmid_bound(qp.N, float(qp.c), float(qp.t))
                expanded = 2 * math.exp(
                    -(k**-4) * 2**k / (float(measure) + 2 * n * k * 2.0**-k)
                )
                assert mine <= expanded * (1 + 1e-12), (k, measure, n)


# ---------------------------------------------------------------------------
# Tail bound
# ---------------------------------------------------------------------------

def test_k0_threshold_values():
    assert k0_threshold(1) == 24      # max{24, 2 log2 2} = max{24, 2}
    assert k0_threshold(7) == 24      # 2 log2 8 = 6 < 24
    assert k0_threshold(2**13 - 1) == 26  # 2 log2 2^13 = 26


def test_k0_threshold_exact_at_power_boundary():
    # lambda + 1 just above a power of two bumps the ceiling
    lam = Fraction(2**13 - 1) + Fraction(1, 10**6)
    assert k0_threshold(lam) == 27


def test_tail_bound_value_against_oracle():
    tb = tail_bound(2, 1, 24)
    assert tb.k0 == 24 and tb.asserted and not tb.underflow
    oracle = float(mp.e ** (mp.mpf(-2 * 2**24) / (1 * 24**4)))
    assert tb.value == pytest.approx(oracle, rel=1e-12)
    assert tb.value == pytest.approx(1.1947555724776326e-44, rel=1e-12)  # frozen


def test_tail_bound_below_threshold_flagged():
    tb = tail_bound(2, 1, 10)
    assert not tb.asserted and tb.k0 == 24
    assert tb.value > 0  # still evaluated, just not asserted


def test_tail_bound_decreasing_in_k():
    # strictly decreasing until the value underflows to the 0.0 floor
    vals = [tail_bound(2, 1, k).value for k in range(24, 40)]
    assert all(a > b or a == b == 0.0 for a, b in zip(vals, vals[1:]))
    assert vals[0] > vals[1] > vals[2] > vals[3] > 0


def test_tail_bound_underflow_flag():
    tb = tail_bound(2, 1, 60)
    assert tb.value == 0.0 and tb.underflow


# ---------------------------------------------------------------------------
# Per-k measure bound
# ---------------------------------------------------------------------------

def test_o_k_golden_against_quad_oracle():
    got = o_k_measure_bound(2, 24)
    oracle = float(2 * mp.mpf(2) ** 24 * 24**3 * mp.e ** (mp.mpf(-2 * 2**24) / 24**5))
    assert got.value == pytest.approx(oracle, rel=1e-12)
    assert got.value == pytest.approx(6859149116.497285, rel=1e-12)  # frozen
    assert got.asserted and not got.underflow


def test_o_k_below_24_flagged():
    got = o_k_measure_bound(2, 10)
    assert not got.asserted


def test_o_k_eventually_decreasing():
    vals = [o_k_measure_bound(2, k).value for k in range(30, 60)]
    assert all(a > b or (a == b == 0.0) for a, b in zip(vals, vals[1:]))


def test_o_k_larger_alphabet_smaller_bound():
    # strict while the b=2 value is above the underflow floor (k <= 33)
    for k in range(30, 34):
        assert o_k_measure_bound(3, k).value < o_k_measure_bound(2, k).value
    for k in range(34, 40):
        assert o_k_measure_bound(3, k).value <= o_k_measure_bound(2, k).value


def test_o_k_underflow_returns_zero_with_flag():
    got = o_k_measure_bound(2, 80)
    assert got.value == 0.0 and got.underflow


def test_o_k_partial_sums():
    total = o_k_measure_partial_sum(2, 40)
    by_hand = math.fsum(o_k_measure_bound(2, k).value for k in range(24, 41))
    assert total == by_hand
    assert o_k_measure_partial_sum(2, 23) == 0.0
