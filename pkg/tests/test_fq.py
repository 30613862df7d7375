"""Finite field arithmetic: worked examples first, then field axioms."""

import pytest
from hypothesis import given, strategies as st

from galscaffold.errors import NoSolution
from galscaffold.fq import GF, rank_mod_p, solve_mod_p
from galscaffold.series import solve_wp_in_fq

from _strategies import fields, fq_elements


def test_f4_generator_satisfies_its_modulus():
    F = GF(2, 2)
    w = F.gen
    assert w * w == w + 1
    assert F.modulus_str() == "w^2+w+1"


def test_prime_field_is_integers_mod_p():
    F = GF(5, 1)
    assert F(3) * F(4) == F(2)
    assert F(3).inverse() == F(2)
    assert F(7) == F(2)


def test_gf_is_cached():
    assert GF(3, 2) is GF(3, 2)


def test_parse_and_format_round_trip():
    F = GF(3, 2)
    for c in F.elements():
        assert F.parse(F.format_code(c.code)) == c


@pytest.mark.parametrize("p,f,c,expect", [
    (2, 1, 0, "zero"),
    (2, 1, 1, None),          # x^2 + x takes only the value 0 on F_2
    (2, 2, 1, "root"),        # w^2 - w = 1 in F_4
])
def test_solve_wp_examples(p, f, c, expect):
    F = GF(p, f)
    if expect is None:
        with pytest.raises(NoSolution):
            solve_wp_in_fq(F(c))
        return
    x = solve_wp_in_fq(F(c))
    assert x ** p - x == F(c)
    if expect == "root":
        assert x in (F.gen, F.gen + 1)


def test_linear_algebra_mod_p():
    assert rank_mod_p([[1, 2], [2, 4]], 3) == 1
    assert rank_mod_p([[1, 0], [0, 1]], 2) == 2
    sol = solve_mod_p([[1, 1], [0, 1]], [2, 1], 3)
    assert sol == [1, 1]
    assert solve_mod_p([[1, 1], [1, 1]], [0, 1], 2) is None


@given(st.data())
def test_field_axioms(data):
    F = data.draw(fields())
    a, b, c = (data.draw(fq_elements(F)) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == F.zero
    if a:
        assert a * a.inverse() == F.one


@given(st.data())
def test_frobenius_is_a_bijection_with_inverse(data):
    F = data.draw(fields())
    a, b = data.draw(fq_elements(F)), data.draw(fq_elements(F))
    k = data.draw(st.integers(-3, 3))
    assert a.frobenius(k).frobenius(-k) == a
    assert (a * b).frobenius(1) == a.frobenius(1) * b.frobenius(1)
    assert a.frobenius(F.f) == a
    assert a.frobenius(1) == a ** F.p


@given(st.data())
def test_solve_wp_exactly_on_trace_zero(data):
    F = data.draw(fields())
    c = data.draw(fq_elements(F))
    if F.trace(c) == 0:
        x = F.solve_wp(c)
        assert x ** F.p - x == c
    else:
        with pytest.raises(NoSolution):
            F.solve_wp(c)
