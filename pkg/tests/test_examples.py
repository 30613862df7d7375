"""Example generators: cyclic prototype, biquadratic reduction, unit-root and weak towers."""

import math
import random

import pytest

from galscaffold.errors import InvalidInput
from galscaffold.examples import (biquadratic_reduce, cyclic_prototype, cyclic_tower, lemma21_check,
                                  random_cyclic_element, random_spec, recommended_precision, unit_root_extension,
                                  weakly_ramified_spec)
from galscaffold.fq import GF
from galscaffold.group_algebra import binom_scalar
from galscaffold.ramification import breaks_from_spec, check_error_bound
from galscaffold.pipeline import full_check
from galscaffold.series import LaurentSeries
from galscaffold.tower import Tower, validate_spec

F2 = GF(2, 1)


def mono(F, k, c=1):
    return LaurentSeries.monomial(F, c, k)


# -- cyclic prototype ---------------------------------------------------------------

def test_cyclic_prototype_two():
    tower, rep = cyclic_prototype(2, 1, mono(F2, -1), trials=3)
    assert rep.passed
    for row in rep.rows:
        assert sorted(v % 2 for v in row) == [0, 1]


def test_cyclic_prototype_three():
    F3 = GF(3, 1)
    _, rep = cyclic_prototype(3, 1, mono(F3, -2), trials=3)
    assert rep.v_binom == -4
    for row in rep.rows:
        assert [v % 3 for v in row] == [2, 1, 0]


def test_binomial_identity_trivial_shifts():
    T = cyclic_tower(3, 1, mono(GF(3, 1), -1))
    x = T.x(0)
    assert lemma21_check(3, 1, mono(GF(3, 1), -1), A_list=[T.raw.zero(), T.raw.one()])
    assert (binom_scalar(x - 1 + 1, 2, 3) - binom_scalar(x, 2, 3)).is_zero()
    rng = random.Random(9)
    assert lemma21_check(3, 1, mono(GF(3, 1), -1), A_list=[random_cyclic_element(T, rng)])


# -- biquadratic ------------------------------------------------------------------------

def test_biquadratic_reduces_to_reference(ref1_spec):
    spec, trace = biquadratic_reduce(mono(F2, -1), mono(F2, -3))
    assert trace.mu == mono(F2, 1)
    assert trace.tau.is_zero()
    assert spec.omegas[1] == mono(F2, -1)
    assert spec.beta == ref1_spec.beta
    assert spec.epsilons[1].is_zero()


def test_biquadratic_with_coset_adjustment():
    spec, trace = biquadratic_reduce(mono(F2, -1), mono(F2, -3) + mono(F2, -1))
    assert trace.tau.is_zero() or trace.tau.valuation() >= 0
    assert check_error_bound(spec).passed
    assert full_check(spec, trials=3).passed


def test_biquadratic_degenerate_pair():
    beta = mono(F2, -3) + mono(F2, 1)
    with pytest.raises(InvalidInput):
        biquadratic_reduce(beta, beta)


def test_biquadratic_rejects_even_valuations():
    with pytest.raises(InvalidInput):
        biquadratic_reduce(mono(F2, -2), mono(F2, -3))


# -- unit-root and weak towers ------------------------------------------------------------

def test_unit_root_over_f4():
    F4 = GF(2, 2)
    w = F4.gen
    spec = unit_root_extension(2, 2, 2)
    assert spec.omegas[1] == mono(F4, 0, w * w)
    assert spec.rhs(1) == mono(F4, -1, w)
    data = breaks_from_spec(spec)
    assert data.lower == [1, 1]


def test_unit_root_degenerates_to_cyclic():
    spec = unit_root_extension(3, 1, 1)
    assert spec.n == 0


def test_unit_root_bad_subfield():
    with pytest.raises(InvalidInput):
        unit_root_extension(2, 3, 2)


def test_weak_example():
    F4 = GF(2, 2)
    spec = weakly_ramified_spec(2, 2, 1, units=[F4(1), F4.gen])
    assert breaks_from_spec(spec).lower == [1, 1]
    assert full_check(spec, trials=3).passed
    with pytest.raises(InvalidInput):
        weakly_ramified_spec(2, 2, 1, units=[F4(1), F4(1)])
    with pytest.raises(InvalidInput):
        weakly_ramified_spec(2, 1, 1)


# -- random specs -----------------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["at", "inside", "zero", "mixed"])
def test_random_specs_are_valid(mode):
    rng = random.Random(mode)
    for p, n in [(2, 1), (3, 2), (2, 2)]:
        spec = random_spec(p, n, rng, eps_mode=mode)
        validate_spec(spec)
        rep = check_error_bound(spec)
        assert rep.passed
        data = breaks_from_spec(spec)
        assert spec.precision == recommended_precision(data)
        if mode == "at":
            assert all(r.valuation == math.floor(r.rhs) + 1 for r in rep.rows)
        if mode == "inside":
            assert all(r.valuation > math.floor(r.rhs) + 1 for r in rep.rows)
        Tower(spec)
