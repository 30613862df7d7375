"""Spec files, series literals and JSON records."""

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from galscaffold.errors import InvalidInput, InvalidSpec
from galscaffold.examples import random_spec
from galscaffold.fq import GF
from galscaffold.series import INF, LaurentSeries
from galscaffold.specio import (emit_spec, format_record, load_spec, parse_records, parse_series, parse_spec,
                                series_from_pairs, series_literal, series_pairs)

from _strategies import fields, series

REF1_TEXT = """\
# reference tower
p = 2
n = 1
beta = t^-1
omega[1] = t^-1
"""


def test_series_literals():
    F4 = GF(2, 2)
    s = parse_series(F4, "(w+1)*t^-2 + t^3 + O(t^8)")
    assert s.valuation() == -2 and s.prec == 8
    assert s.coefficient(-2) == F4.gen + 1
    assert parse_series(F4, "w") == LaurentSeries.monomial(F4, F4.gen, 0)
    F3 = GF(3, 1)
    assert parse_series(F3, "-t^-1") == LaurentSeries.monomial(F3, 2, -1)
    assert parse_series(F3, "2*t - t^2").coefficient(2) == F3(2)
    for bad in ["t^", "(w+1", "3*x", ""]:
        with pytest.raises(ValueError):
            parse_series(F4, bad)


def test_parse_minimal_spec_defaults():
    spec = parse_spec(REF1_TEXT)
    assert (spec.p, spec.f, spec.n) == (2, 1, 1)
    assert spec.omegas[0] == LaurentSeries.one(spec.field)
    assert all(e.is_zero() for e in spec.epsilons)
    assert parse_spec(REF1_TEXT, precision=33).precision == 33


@pytest.mark.parametrize("text,clause", [
    ("p = 2\nn = 1\n", "syntax"),
    ("p = 2\nn = 1\nbeta = t^-1\nomega[1] = t^-1\nfoo = 3\n", "syntax"),
    ("p = 2\nn = 1\nbeta = t^-1\n", "shape"),
    ("p = 2\nn = 1\nbeta = t^-1\nomega[1] = t^-1\nomega[2] = t\n", "shape"),
    ("p = 4\nn = 0\nbeta = t^-1\n", "field"),
    ("p = 2\nf = 2\nmodulus = w^2+1\nn = 0\nbeta = t^-1\n", "field"),
    ("p = 2\nn = 0\nn = 1\nbeta = t^-1\n", "syntax"),
    ("p = 2\nn = 0\nbeta = t^^-1\n", "syntax"),
])
def test_malformed_specs(text, clause):
    with pytest.raises(InvalidSpec) as exc:
        parse_spec(text)
    assert exc.value.clause == clause


def test_missing_file(tmp_path):
    with pytest.raises(InvalidInput):
        load_spec(str(tmp_path / "nope.spec"))


@settings(max_examples=30)
@given(st.sampled_from([(2, 1), (3, 2), (2, 2)]), st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_spec_round_trip(params, seed, f):
    p, n = params
    spec = random_spec(p, n, random.Random(seed), f=f if f > n else 1)
    text = emit_spec(spec, comment="round trip")
    back = parse_spec(text)
    assert back.same_as(spec)
    assert emit_spec(back, comment="round trip") == text


@given(st.data())
def test_series_literal_round_trip(data):
    F = data.draw(fields())
    s = data.draw(series(F))
    back = parse_series(F, series_literal(s))
    assert back.identical(s)
    assert series_from_pairs(F, json.loads(json.dumps(series_pairs(s)))).identical(s)


def test_record_key_order_and_values():
    from fractions import Fraction
    line = format_record({"passed": True, "name": "x", "kind": "check", "zzz": 1, "source": "formula"})
    assert line == '{"kind": "check", "name": "x", "passed": true, "source": "formula", "zzz": 1}'
    line = format_record({"kind": "bound", "i": 1, "valuation": INF, "rhs": Fraction(-5, 2)})
    rec = next(parse_records(line))
    assert rec == {"kind": "bound", "i": 1, "valuation": "inf", "rhs": "-5/2"}
