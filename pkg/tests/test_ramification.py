"""Ramification breaks: formulas, the direct computation and the error-term bound."""

from fractions import Fraction
import random

import pytest
from hypothesis import given, strategies as st

from galscaffold.errors import BoundViolated
from galscaffold.examples import cyclic_tower, weakly_ramified_spec
from galscaffold.fq import GF
from galscaffold.ramification import (BreakData, breaks_direct, breaks_from_spec, check_congruences,
                                      check_error_bound, error_bound_rhs, herbrand_lower_to_upper,
                                      herbrand_upper_to_lower)
from galscaffold.series import LaurentSeries
from galscaffold.tower import Tower, TowerSpec

F2 = GF(2, 1)


def mono(F, k, c=1):
    return LaurentSeries.monomial(F, c, k)


def formula_breaks(p, n, b, m):
    lower = [b + p**n * sum(p**j * m[j - 1] for j in range(1, i + 1)) for i in range(n + 1)]
    upper = [b + p**n * sum(m[:i]) for i in range(n + 1)]
    return BreakData(p, n, b, list(m), lower, upper)


# -- examples ---------------------------------------------------------------------

def test_reference_breaks(ref1_spec):
    data = breaks_from_spec(ref1_spec)
    assert data.m == [1]
    assert data.lower == [1, 5] and data.upper == [1, 3] and data.b_m == 5
    assert data.rows() == [(0, 1, 1, None), (1, 5, 3, 1)]


def test_equal_valuations_give_one_break():
    spec = weakly_ramified_spec(2, 3, 2)
    data = breaks_from_spec(spec)
    assert data.lower == [1, 1, 1] and data.upper == [1, 1, 1]


def test_single_break_for_cyclic():
    T = cyclic_tower(3, 1, mono(GF(3, 1), -5))
    data = breaks_from_spec(T.spec)
    assert data.lower == [5] == data.upper


def test_direct_breaks_examples(ref1_tower):
    assert breaks_direct(ref1_tower).values == [1, 5]
    full = breaks_direct(ref1_tower, exhaustive=True)
    assert full.values == [1, 5]
    # sigma_0 and sigma_0 sigma_1 act with break 1, sigma_1 with break 5
    assert full.counts() == {1: 2, 5: 1}
    assert breaks_direct(cyclic_tower(2, 1, mono(F2, -1))).values == [1]
    assert breaks_direct(Tower(weakly_ramified_spec(2, 2, 1))).values == [1]


@pytest.mark.parametrize("lower,orders,upper", [
    ([7], [8], [7]),
    ([1, 5], [4, 2], [1, 3]),
    ([1, 28], [9, 3], [1, 10]),
])
def test_herbrand_examples(lower, orders, upper):
    assert herbrand_lower_to_upper(lower, orders) == upper
    assert herbrand_upper_to_lower(upper, orders) == lower


def test_error_bound_examples(ref1_spec):
    zero = LaurentSeries.zero(F2)
    assert check_error_bound(ref1_spec).passed
    data = breaks_from_spec(ref1_spec)
    assert error_bound_rhs(data, 1) == Fraction(-5, 2)
    ok = TowerSpec(2, 1, 1, ref1_spec.beta, ref1_spec.omegas, [zero, mono(F2, -2)], 64)
    row = check_error_bound(ok).rows[0]
    assert row.passed and row.rhs == row.rhs_breaks == Fraction(-5, 2)
    bad = TowerSpec(2, 1, 1, ref1_spec.beta, ref1_spec.omegas, [zero, mono(F2, -3)], 64)
    with pytest.raises(BoundViolated):
        check_error_bound(bad)
    assert not check_error_bound(bad, strict=False).passed


def test_positive_error_terms_are_reducible(ref1_spec):
    zero = LaurentSeries.zero(F2)
    spec = TowerSpec(2, 1, 1, ref1_spec.beta, ref1_spec.omegas, [zero, mono(F2, 3)], 64)
    assert check_error_bound(spec).rows[0].reducible


def test_congruence_violation_is_detected():
    bad = BreakData(2, 1, 1, [1], [1, 4], [1, 3])
    with pytest.raises(AssertionError):
        check_congruences(bad)


# -- properties -----------------------------------------------------------------------

@given(st.sampled_from([2, 3, 5]), st.integers(0, 2), st.data())
def test_formula_invariants(p, n, data):
    b = data.draw(st.integers(1, 40).filter(lambda x: x % p))
    m = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    bd = formula_breaks(p, n, b, m)
    check_congruences(bd)
    for i in range(n + 1):
        assert (bd.lower[i] - bd.lower[n]) % p ** (i + 1) == 0
    distinct = bd.distinct_lower()
    lower = [v for v, _ in distinct]
    orders = [o for _, o in distinct]
    assert all(v % p == lower[0] % p for v in lower)
    upper = herbrand_lower_to_upper(lower, orders)
    assert upper == bd.distinct_upper()
    assert herbrand_upper_to_lower(upper, orders) == lower
    for i in range(1, n + 1):
        alt = Fraction(-bd.b_m, p**n) + bd.upper[n] - bd.upper[i]
        assert error_bound_rhs(bd, i) == alt


@given(st.lists(st.integers(1, 20), min_size=1, max_size=4), st.sampled_from([2, 3]), st.data())
def test_herbrand_round_trip(gaps, p, data):
    lower = [sum(gaps[:k + 1]) for k in range(len(gaps))]
    orders = [p ** (len(gaps) - k) for k in range(len(gaps))]
    upper = herbrand_lower_to_upper(lower, orders)
    assert herbrand_upper_to_lower(upper, orders) == lower
    assert all(u <= l for u, l in zip(upper, lower))
