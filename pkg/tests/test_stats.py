import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgen.blockcount import (
    IntervalUnion,
    PositionSet,
    count_blocks,
    counts_of_counts,
    floor_scaled,
)
from pgen.errors import UsageError
from pgen.seqgen import Alphabet, iid_uniform_source
from pgen.stats import (
    EmpiricalLaw,
    PoissonLaw,
    binomial_pmf,
    kallenberg_diagnostic,
    lambda_continuity_gap,
    poisson_pmf,
    poisson_sf,
    sup_deviation,
    tv_between,
    tv_distance,
)

mp.mp.dps = 50


def _mp_poisson(lam, i):
    lam = mp.mpf(lam)
    return mp.e ** (-lam) * lam**i / mp.factorial(i)


# ---------------------------------------------------------------------------
# pmfs
# ---------------------------------------------------------------------------

def test_poisson_pmf_values():
    assert poisson_pmf(1, 0) == pytest.approx(math.exp(-1), rel=1e-15)
    assert poisson_pmf(1, 1) == pytest.approx(math.exp(-1), rel=1e-15)
    assert poisson_pmf(2, 2) == pytest.approx(2 * math.exp(-2), rel=1e-15)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0, 10.0])
def test_poisson_pmf_high_precision(lam):
    for i in range(0, 171, 3):
        exact = _mp_poisson(lam, i)
        if exact < mp.mpf("1e-280"):
            continue
        assert abs(poisson_pmf(lam, i) - exact) / exact < 1e-12


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0, 10.0])
def test_poisson_pmf_sums_to_one(lam):
    # accumulated rounding can land a few ulps above 1, so the 1e-12
    # tolerance applies on both sides
    total = math.fsum(poisson_pmf(lam, i) for i in range(201))
    assert 1 - 1e-12 <= total <= 1 + 1e-12


def test_poisson_sf_complements_pmf():
    lam = 1.5
    for i in range(10):
        cdf = math.fsum(poisson_pmf(lam, j) for j in range(i + 1))
        assert poisson_sf(lam, i) == pytest.approx(1 - cdf, abs=1e-14)


def test_binomial_pmf_values():
    assert binomial_pmf(1, 0.5, 0) == pytest.approx(0.5, rel=1e-14)
    assert binomial_pmf(4, 0.5, 2) == pytest.approx(0.375, rel=1e-14)
    assert binomial_pmf(10**6, 1e-6, 0) == pytest.approx(math.exp(-1), abs=1e-6)


def test_binomial_pmf_edge_probabilities():
    assert binomial_pmf(5, 0.0, 0) == 1.0
    assert binomial_pmf(5, 0.0, 3) == 0.0
    assert binomial_pmf(5, 1.0, 5) == 1.0


@pytest.mark.parametrize("N", [10**3, 10**6, 10**9])
def test_binomial_pmf_high_precision(N):
    for lam in (0.5, 1.0, 2.0):
        p = lam / N
        for i in range(9):
            exact = mp.binomial(N, i) * mp.mpf(p) ** i * (1 - mp.mpf(p)) ** (N - i)
            assert abs(binomial_pmf(N, p, i) - exact) / exact < 1e-10


def test_binomial_converges_to_poisson():
    for lam in (Fraction(1, 2), Fraction(1), Fraction(2)):
        gaps = []
        for N in (10**3, 10**4, 10**5, 10**6):
            gap = max(
                abs(binomial_pmf(N, float(lam) / N, i) - poisson_pmf(float(lam), i))
                for i in range(9)
            )
            gaps.append(gap)
        assert gaps[-1] <= 1e-3
        assert all(a > b for a, b in zip(gaps, gaps[1:]))


# ---------------------------------------------------------------------------
# TV distance and sup deviation
# ---------------------------------------------------------------------------

def test_tv_zero_for_truncated_poisson_copy():
    lam = 1.0
    i_max = 60
    probs = {}
    acc = Fraction(0)
    # rational approximation of the pmf, renormalized to sum exactly to 1
    for i in range(i_max):
        f = Fraction(poisson_pmf(lam, i)).limit_denominator(10**15)
        probs[i] = f
        acc += f
    probs[i_max] = 1 - acc
    law = EmpiricalLaw(2, 6, probs)
    law.check()
    assert tv_distance(law, PoissonLaw(lam)) < 1e-12


def test_tv_point_mass():
    law = EmpiricalLaw(2, 1, {0: Fraction(1)})
    assert tv_distance(law, PoissonLaw(1.0)) == pytest.approx(1 - math.exp(-1), rel=1e-14)


def test_tv_iid_golden_regenerated_by_quad_oracle():
    src = iid_uniform_source(Alphabet(2), 20240817)
    n = floor_scaled(1, 2, 14)
    coc = counts_of_counts(count_blocks(src, 2, 14, PositionSet.prefix(n)))
    # the exact occupancy table behind the golden
    assert coc.table == {0: 5952, 1: 6129, 2: 3016, 3: 988, 4: 243, 5: 51, 6: 3, 7: 2}
    law = EmpiricalLaw.from_counts_of_counts(coc)
    got = tv_distance(law, PoissonLaw.from_rational(1))
    assert got == pytest.approx(0.0064435514679610775, rel=1e-12)  # frozen golden
    # independent quad-precision recomputation from the exact table
    lam = mp.mpf(1)
    body = mp.mpf(0)
    for i in range(law.i_max + 1):
        e = mp.mpf(coc.table.get(i, 0)) / mp.mpf(2**14)
        body += abs(e - _mp_poisson(1, i))
    tail = 1 - sum(_mp_poisson(1, i) for i in range(law.i_max + 1))
    assert abs(got - float((body + tail) / 2)) < 1e-12


def test_sup_deviation_exact_match_is_zero():
    law = EmpiricalLaw(2, 1, {0: Fraction(1)})
    ref = PoissonLaw(1.0)
    sd = sup_deviation(law, ref, range(0, 3))
    assert sd.i == 0 and sd.value == pytest.approx(1 - math.exp(-1), rel=1e-14)


def test_sup_deviation_tie_breaks_to_smaller_i():
    # Poisson(1) has pmf(0) == pmf(1); empirical zero everywhere ties them
    law = EmpiricalLaw(2, 1, {9: Fraction(1)})
    sd = sup_deviation(law, PoissonLaw(1.0), range(0, 2))
    assert sd.i == 0


def test_sup_deviation_empty_range_errors():
    law = EmpiricalLaw(2, 1, {0: Fraction(1)})
    with pytest.raises(UsageError):
        sup_deviation(law, PoissonLaw(1.0), [])


def test_sup_deviation_iid_golden():
    src = iid_uniform_source(Alphabet(2), 20240817)
    n = floor_scaled(1, 2, 14)
    law = EmpiricalLaw.from_counts_of_counts(
        counts_of_counts(count_blocks(src, 2, 14, PositionSet.prefix(n)))
    )
    sd = sup_deviation(law, PoissonLaw.from_rational(1))
    assert sd.i == 1
    exact = abs(Fraction(6129, 2**14) - Fraction(poisson_pmf(1.0, 1)))
    assert sd.value == pytest.approx(float(exact), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_tv_between_is_a_metric(data):
    def law(tag):
        n = data.draw(st.integers(1, 6), label=f"support-{tag}")
        weights = data.draw(
            st.lists(st.integers(0, 8), min_size=n, max_size=n).filter(lambda w: sum(w) > 0),
            label=f"weights-{tag}",
        )
        total = sum(weights)
        return EmpiricalLaw(2, 3, {i: Fraction(w, total) for i, w in enumerate(weights) if w})

    e1, e2, e3 = law("a"), law("b"), law("c")
    d12, d21 = tv_between(e1, e2), tv_between(e2, e1)
    assert d12 == d21
    assert 0 <= d12 <= 1
    assert (d12 == 0) == (e1.probs == e2.probs)
    assert tv_between(e1, e3) <= d12 + tv_between(e2, e3)


def test_empirical_law_probabilities_sum_to_one():
    src = iid_uniform_source(Alphabet(3), 15)
    coc = counts_of_counts(count_blocks(src, 3, 4, PositionSet.prefix(81)))
    law = EmpiricalLaw.from_counts_of_counts(coc)
    law.check()
    assert sum(law.probs.values(), Fraction(0)) == 1


# ---------------------------------------------------------------------------
# Convergence diagnostics
# ---------------------------------------------------------------------------

def test_kallenberg_full_prefix_mean_exact():
    src = iid_uniform_source(Alphabet(2), 4)
    report = kallenberg_diagnostic(src, 2, IntervalUnion.from_lambda(1), [6, 8])
    for row in report.rows:
        assert row.mean == 1 and row.mean_gap == 0.0


def test_kallenberg_union_five_seeds():
    S = IntervalUnion.parse("(0,1]+(3/2,2]")
    for seed in (11, 22, 33, 44, 55):
        src = iid_uniform_source(Alphabet(2), seed)
        report = kallenberg_diagnostic(src, 2, S, [16])
        (row,) = report.rows
        assert row.mean == Fraction(3, 2)
        assert abs(row.p_zero_gap) < 0.02, seed


def test_kallenberg_single_row():
    src = iid_uniform_source(Alphabet(2), 8)
    report = kallenberg_diagnostic(src, 2, IntervalUnion.from_lambda(1), [10])
    assert len(report.rows) == 1 and report.rows[0].k == 10


def test_lambda_continuity_equal_rates():
    src = iid_uniform_source(Alphabet(2), 6)
    res = lambda_continuity_gap(src, 2, 10, 1, 1)
    assert res.gap == 0


def test_lambda_continuity_one_extra_position():
    src = iid_uniform_source(Alphabet(2), 14)
    lam2 = Fraction(2**14 + 1, 2**14)
    res = lambda_continuity_gap(src, 2, 14, 1, lam2)
    assert float(res.gap) <= res.bound
    # one extra position moves at most one word between occupancy classes
    assert res.gap <= Fraction(1, 2**14)


def test_lambda_continuity_gap_at_most_one():
    src = iid_uniform_source(Alphabet(2), 31)
    res = lambda_continuity_gap(src, 2, 8, Fraction(1, 2), 2)
    assert 0 <= res.gap <= 1
