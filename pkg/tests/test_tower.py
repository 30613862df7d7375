"""Towers: construction, Galois action, norms and the valuation oracle."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from galscaffold.errors import InvalidSpec
from galscaffold.examples import random_spec
from galscaffold.fq import GF
from galscaffold.series import INF, LaurentSeries
from galscaffold.tower import (Tower, TowerSpec, apply_shifts, bezout_pair, group_add, lincomb, norm_levels,
                               norm_tree, validate_spec)

F2 = GF(2, 1)


def mono(F, k, c=1):
    return LaurentSeries.monomial(F, c, k)


def spec_of(p, beta, omegas, f=1, prec=64):
    F = GF(p, f)
    return TowerSpec(p, f, len(omegas) - 1, beta, omegas, [LaurentSeries.zero(F)] * len(omegas), prec)


@pytest.fixture(scope="module")
def cyclic2():
    return Tower(spec_of(2, mono(F2, -1), [LaurentSeries.one(F2)]))


# -- construction ---------------------------------------------------------------

def test_reference_spec_is_valid(ref1_spec):
    validate_spec(ref1_spec)


@pytest.mark.parametrize("beta_k,omegas,clause", [
    (-1, [0, 0], "independence"),     # Omega = (1, 1)
    (-2, [0, -1], "gcd"),             # beta = t^-2 at p = 2
    (-1, [0, 1], "ordering"),         # v(Omega_1) > v(Omega_0)
])
def test_invalid_specs_are_rejected(beta_k, omegas, clause):
    spec = spec_of(2, mono(F2, beta_k), [mono(F2, k) for k in omegas])
    with pytest.raises(InvalidSpec) as exc:
        Tower(spec)
    assert exc.value.clause == clause


def test_omega0_must_be_one():
    spec = spec_of(3, mono(GF(3, 1), -1), [mono(GF(3, 1), 0, 2)])
    with pytest.raises(InvalidSpec, match="omega0"):
        validate_spec(spec)


# -- Galois action ----------------------------------------------------------------

def test_generators_shift_their_variable(ref1_tower):
    T = ref1_tower
    x0, x1 = T.x(0), T.x(1)
    assert (T.apply_group_element((1, 0), x0) - x0 - 1).is_zero()
    assert (T.apply_group_element((1, 0), x1) - x1).is_zero()
    assert (T.apply_group_element((0, 0), x0 * x1) - x0 * x1).is_zero()


def test_action_on_first_scaffold_coordinate(ref1_tower):
    T = ref1_tower
    X = T.x(1) - T.x(0) * mono(F2, -1)
    diff = T.apply_group_element((1, 0), X) - X
    assert diff.is_in_base()
    assert diff.constant_coefficient() == mono(F2, -1)


# -- norms and valuations -----------------------------------------------------------

def test_norm_examples(ref1_tower, cyclic2):
    assert cyclic2.norm(cyclic2.x(0)) == mono(F2, -1)
    assert ref1_tower.norm(ref1_tower.x(0)) == mono(F2, -2)
    a = mono(F2, -1) + mono(F2, 2)
    assert ref1_tower.norm(ref1_tower.constant(a)) == a ** 4


def test_valuation_examples(ref1_tower):
    T = ref1_tower
    assert T.valuation(T.constant(mono(F2, 1))) == 4
    assert T.valuation(T.x(0)) == -2
    assert T.valuation(T.x(1) - T.x(0) * mono(F2, -1)) == -5


def test_uniformizer(ref1_tower, cyclic2):
    assert bezout_pair(4, 5) == (4, 3)
    assert bezout_pair(2, 1) == (1, 1)
    assert ref1_tower.valuation(ref1_tower.uniformizer()) == 1
    assert cyclic2.valuation(cyclic2.uniformizer()) == 1
    assert cyclic2.valuation(cyclic2.x(0) * mono(F2, 1)) == 1


@pytest.mark.parametrize("v", [0, 4, 5, -3, 21])
def test_random_element_of_valuation(ref1_tower, v):
    e = ref1_tower.random_element_of_valuation(v, seed=v)
    assert ref1_tower.valuation(e) == v


def test_norm_methods_agree(ref1_tower):
    rng = random.Random(4)
    for _ in range(5):
        e = ref1_tower.to_raw(ref1_tower.random_element_of_valuation(rng.randrange(-8, 8), rng))
        a, b = norm_levels(e), norm_tree(e)
        assert (a - b).is_zero()


# -- properties on random towers ----------------------------------------------------

_towers = {}


def tower_for(p, n, seed):
    key = (p, n, seed)
    if key not in _towers:
        _towers[key] = Tower(random_spec(p, n, random.Random(seed), eps_mode="inside"))
    return _towers[key]


tower_keys = st.tuples(st.sampled_from([(2, 1), (3, 1), (2, 2)]), st.integers(0, 3))


def random_raw_element(T, rng, span=3):
    coeffs = {}
    for m in T.raw.monomials():
        if rng.random() < 0.6:
            lo = rng.randrange(-span, span)
            coeffs[m] = LaurentSeries.from_dict(T.field, {lo + d: T.field.random_element(rng) for d in range(span)})
    return T.element(coeffs)


@settings(max_examples=25)
@given(tower_keys, st.integers(0, 10**6))
def test_automorphism_laws(key, seed):
    (p, n), s = key
    T = tower_for(p, n, s)
    rng = random.Random(seed)
    e, f = random_raw_element(T, rng), random_raw_element(T, rng)
    g = tuple(rng.randrange(p) for _ in range(n + 1))
    h = tuple(rng.randrange(p) for _ in range(n + 1))
    assert (apply_shifts(e * f, g) - apply_shifts(e, g) * apply_shifts(f, g)).is_zero()
    assert (apply_shifts(e, group_add(g, h, p)) - apply_shifts(apply_shifts(e, h), g)).is_zero()
    for i in range(n + 1):
        gi = tuple(p - 1 if k == i else 0 for k in range(n + 1))
        once = tuple(1 if k == i else 0 for k in range(n + 1))
        assert (apply_shifts(apply_shifts(e, gi), once) - e).is_zero()
    c = T.constant(LaurentSeries.from_dict(T.field, {-1: 1, 2: 1}))
    assert (apply_shifts(c, g) - c).is_zero()


@settings(max_examples=15)
@given(tower_keys, st.integers(0, 10**6))
def test_valuation_is_a_valuation(key, seed):
    (p, n), s = key
    T = tower_for(p, n, s)
    rng = random.Random(seed)
    D = T.degree
    a = T.random_element_of_valuation(rng.randrange(-D, D), rng)
    b = T.random_element_of_valuation(rng.randrange(-D, D), rng)
    va, vb = T.valuation(a), T.valuation(b)
    assert T.valuation(a * b) == va + vb
    total = a + b
    if not total.is_zero():
        assert T.valuation(total) >= min(va, vb)
    k = rng.randrange(-4, 5)
    assert T.valuation(T.constant(mono(T.field, k) + mono(T.field, k + 1))) == D * k


@settings(max_examples=10)
@given(tower_keys, st.integers(0, 10**6))
def test_norm_is_galois_invariant(key, seed):
    (p, n), s = key
    T = tower_for(p, n, s)
    rng = random.Random(seed)
    e = random_raw_element(T, rng, span=2)
    g = tuple(rng.randrange(p) for _ in range(n + 1))
    assert (T.norm(apply_shifts(e, g)) - T.norm(e)).is_zero()


@settings(max_examples=20)
@given(tower_keys, st.integers(0, 10**6), st.integers(1, 12), st.integers(1, 12))
def test_weighted_precision_is_sound(key, seed, r1, r2):
    """Products and conjugates of truncated elements agree with the untruncated ones."""
    (p, n), s = key
    T = tower_for(p, n, s)
    P = T.adapted.pres
    rng = random.Random(seed)
    x = T.random_unit(rng) * P.gen(rng.randrange(n + 1)).shift(rng.randrange(-3, 4))
    y = T.random_unit(rng) * P.gen(rng.randrange(n + 1))
    xt = x.truncate_relative(r1 * P.denom)
    yt = y.truncate_relative(r2 * P.denom)
    assert xt.prec != INF
    assert (x * y - xt * yt).is_zero()
    g = tuple(rng.randrange(p) for _ in range(n + 1))
    assert (apply_shifts(x * y, g) - apply_shifts(xt, g) * apply_shifts(yt, g)).is_zero()
    sc = LaurentSeries.from_dict(T.field, {-2: 1, 0: 1})
    assert (lincomb([sc, sc], [x, y]) - lincomb([sc.truncate(4), sc], [xt, yt])).is_zero()


@settings(max_examples=10)
@given(tower_keys, st.integers(0, 10**6))
def test_oracle_agrees_across_frames(key, seed):
    (p, n), s = key
    T = tower_for(p, n, s)
    rng = random.Random(seed)
    e = random_raw_element(T, rng, span=2)
    if e.is_zero():
        return
    assert T.valuation(e, frame="raw") == T.valuation(e, frame="adapted")
