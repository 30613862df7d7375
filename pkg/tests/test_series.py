"""Truncated Laurent series: hand-checked examples, then ring and precision properties."""

import pytest
from hypothesis import assume, given, strategies as st

from galscaffold.errors import DivisionByZero, NonzeroUndetectable
from galscaffold.fq import GF
from galscaffold.series import (INF, LaurentSeries, format_series, series_invert, series_phi,
                                series_valuation, series_wp)

from _strategies import fields, fq_elements, series

F2, F3, F4 = GF(2, 1), GF(3, 1), GF(2, 2)


def mono(F, k, c=1, prec=INF):
    return LaurentSeries.monomial(F, c, k, prec)


# -- examples -----------------------------------------------------------------

def test_valuation_examples():
    assert series_valuation(mono(F2, 3) + mono(F2, 5)) == 3
    with pytest.raises(NonzeroUndetectable):
        series_valuation(LaurentSeries.zero(F2, 10))
    assert series_valuation(series_wp(mono(F2, -1))) == -2


def test_wp_examples():
    for c in range(3):
        assert series_wp(mono(F3, 0, c)).is_zero()
    assert series_wp(mono(F2, -1)) == mono(F2, -2) + mono(F2, -1)
    w = F4.gen
    assert series_wp(mono(F4, 0, w)) == LaurentSeries.one(F4)


def test_phi_examples():
    s = mono(F2, -1) + mono(F2, 4)
    assert series_phi(s, 0).identical(s)
    assert series_phi(mono(F2, -1), 1) == mono(F2, -2)
    w = F4.gen
    assert series_phi(mono(F4, 1, w), 1) == mono(F4, 2, w * w)


def test_phi_scales_precision():
    s = mono(F3, 1, 1, prec=5)
    assert series_phi(s, 2).prec == 45


def test_invert_examples():
    assert series_invert(mono(F2, 2)) == mono(F2, -2)
    g = (LaurentSeries.one(F2) + mono(F2, 1)).invert(10)
    assert g == LaurentSeries.from_dict(F2, {k: 1 for k in range(10)}, 10)
    h = series_wp(mono(F2, -1)).invert(8)
    assert h.valuation() == 2
    assert h == LaurentSeries.from_dict(F2, {k: 1 for k in range(2, 10)}, 10)
    with pytest.raises(DivisionByZero):
        LaurentSeries.zero(F2, 4).invert()


def test_precision_is_reported_and_respected():
    s = LaurentSeries.from_dict(F2, {-1: 1, 2: 1}, 4)
    assert format_series(s) == "t^-1 + t^2 + O(t^4)"
    with pytest.raises(NonzeroUndetectable):
        s.coefficient(4)
    assert s.relative_precision() == 5
    # t^-1 * (t^-1 + t^2 + O(t^4)) only knows coefficients below t^3
    assert (mono(F2, -1) * s).prec == 3


# -- properties ---------------------------------------------------------------

@given(st.data())
def test_ring_laws(data):
    F = data.draw(fields())
    a, b, c = (data.draw(series(F)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(st.data())
def test_wp_is_additive_and_fp_linear(data):
    F = data.draw(fields())
    a, b = data.draw(series(F)), data.draw(series(F))
    assert (a + b).wp() == a.wp() + b.wp()
    c = data.draw(st.integers(0, F.p - 1))
    assert a.scale(c).wp() == a.wp().scale(c)


@given(st.data())
def test_wp_of_scalar_multiple(data):
    F = data.draw(fields())
    x = data.draw(series(F))
    c = data.draw(fq_elements(F))
    # wp(c x) = c^p phi(x) - c x
    assert x.scale(c).wp() == x.phi().scale(c ** F.p) - x.scale(c)


@given(st.data())
def test_phi_is_a_ring_homomorphism(data):
    F = data.draw(fields())
    a, b = data.draw(series(F)), data.draw(series(F))
    assert (a * b).phi() == a.phi() * b.phi()
    assert (a + b).phi(2) == a.phi(2) + b.phi(2)
    if a.is_exact():
        assert a.phi(1) == a ** F.p


@given(st.data())
def test_invert_round_trip(data):
    F = data.draw(fields())
    s = data.draw(series(F, nonzero=True))
    inv = s.invert(20)
    prod = s * inv
    assert (prod - 1).is_zero()
    assert inv.relative_precision() == min(s.relative_precision(), 20) or s.coeffs.shape[1] == 1


@given(st.data())
def test_truncated_inputs_agree_with_exact_results(data):
    """Operations on truncations never report a digit the exact result contradicts."""
    F = data.draw(fields())
    a = data.draw(series(F, exact=True))
    b = data.draw(series(F, exact=True, nonzero=True))
    pa = a.valuation_bound() + data.draw(st.integers(0, 6))
    pb = b.valuation() + data.draw(st.integers(1, 6))
    ta, tb = a.truncate(pa), b.truncate(pb)
    for got, exact in [(ta * tb, a * b), (ta + tb, a + b), (ta.wp(), a.wp()), (ta.phi(2), a.phi(2)),
                       (ta * tb.invert(), a * b.invert(40))]:
        assume(got.prec != INF)
        diff = exact.truncate(got.prec) - got
        assert diff.is_zero(), (got, exact)


@given(st.data())
def test_nonzero_invariant(data):
    F = data.draw(fields())
    s = data.draw(series(F))
    if not s.is_zero():
        assert s.leading_coefficient()
        assert s.prec > s.valuation()
