"""Text formats: series literals, tower spec files and report records.

Series literal
    A sum of terms ``c*t^k`` with ``c`` an F_q literal in the power basis of
    the fixed generator ``w`` (``(w^2+1)*t^-3``, ``2*t``, ``t^-1``, ``w``),
    optionally followed by ``+ O(t^k)`` for an inexact series.

Spec file
    Line oriented ``key = value``; ``#`` starts a comment.  Keys::

        p, f, n, precision           integers
        modulus                      informational; checked against GF(p, f)
        beta                         series literal
        omega[i], epsilon[i]         series literals, 0 <= i <= n

    Missing ``epsilon[i]`` default to 0 and ``omega[0]`` defaults to 1.

Records
    One JSON object per line with keys in a fixed order (``RECORD_FIELDS``).
    Series inside records are lists of ``[exponent, "c_0,...,c_(f-1)"]``
    pairs, the coefficient given by its residues in the power basis, with
    an optional trailing ``["O", k]`` marker.
"""

from __future__ import annotations

import json
import re
from typing import Iterable, Iterator

from .errors import InvalidInput, InvalidSpec
from .fq import GF
from .series import INF, DEFAULT_PRECISION, LaurentSeries, format_series
from .tower import TowerSpec

SPEC_HEADER = "# galscaffold tower spec"

# fixed key order of every record kind; unknown keys go last in sorted order
RECORD_FIELDS: dict[str, tuple[str, ...]] = {
    "spec": ("kind", "p", "f", "n", "modulus", "precision", "b", "beta", "omega", "epsilon"),
    "check": ("kind", "name", "passed", "source", "detail"),
    "bound": ("kind", "i", "valuation", "rhs", "passed", "reducible"),
    "break": ("kind", "index", "lower", "upper", "m", "source"),
    "direct": ("kind", "sigma", "i_sigma", "source"),
    "herbrand": ("kind", "lower", "orders", "upper", "round_trip", "passed"),
    "matrix": ("kind", "name", "row", "entries"),
    "theta": ("kind", "index", "terms"),
    "alpha": ("kind", "index", "value", "valuation"),
    "row": ("kind", "trial", "a", "predicted", "measured", "passed", "source"),
    "trial": ("kind", "trial", "v_rho", "rows", "passed", "residues_complete", "source"),
    "summary": ("kind", "command", "passed", "detail"),
    "error": ("kind", "code", "module", "detail"),
}


# ---------------------------------------------------------------------------
# series literals
# ---------------------------------------------------------------------------

_MONO = re.compile(r"^t(?:\^\(?(-?\d+)\)?)?$")
_BIGO = re.compile(r"^O\(t(?:\^\(?(-?\d+)\)?)?\)$")


def _split_terms(text: str) -> list[tuple[int, str]]:
    """Split at top-level + and - signs; a '-' right after '^' is an exponent sign."""
    terms: list[tuple[int, str]] = []
    depth, sign, cur = 0, 1, []
    prev = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced parentheses in {text!r}")
        if depth == 0 and ch in "+-" and prev not in ("^", ""):
            if cur:
                terms.append((sign, "".join(cur)))
            elif ch == "+":
                raise ValueError(f"empty term in {text!r}")
            sign = -1 if ch == "-" else 1
            cur = []
            prev = ch
            continue
        if depth == 0 and ch == "-" and prev == "":
            sign = -sign
            prev = ch
            continue
        cur.append(ch)
        prev = ch
    if depth:
        raise ValueError(f"unbalanced parentheses in {text!r}")
    if cur:
        terms.append((sign, "".join(cur)))
    return terms


def parse_series(field: GF, text: str) -> LaurentSeries:
    """Parse a series literal such as ``(w+1)*t^-2 + t^3 + O(t^8)``."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty series literal")
    terms: dict[int, object] = {}
    prec = INF
    for sign, term in _split_terms(s):
        m = _BIGO.match(term)
        if m:
            if sign < 0:
                raise ValueError("negative O-term")
            k = int(m.group(1)) if m.group(1) is not None else 1
            prec = min(prec, k)
            continue
        coeff_txt, mono_txt = _split_coefficient(term)
        if mono_txt is None:
            k = 0
        else:
            mm = _MONO.match(mono_txt)
            if not mm:
                raise ValueError(f"bad monomial {mono_txt!r} in {text!r}")
            k = int(mm.group(1)) if mm.group(1) is not None else 1
        c = field.parse(coeff_txt) if coeff_txt else field.one
        if sign < 0:
            c = -c
        terms[k] = terms[k] + c if k in terms else c
    return LaurentSeries.from_dict(field, terms, prec)


def _split_coefficient(term: str) -> tuple[str | None, str | None]:
    """``c*t^k`` -> (c, t^k); ``t^k`` -> (None, t^k); ``c`` -> (c, None)."""
    if term.startswith("t"):
        return None, term
    if term.startswith("("):
        depth = 0
        for idx, ch in enumerate(term):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0:
                head, rest = term[:idx + 1], term[idx + 1:]
                break
        else:
            raise ValueError(f"unbalanced term {term!r}")
        if not rest:
            return head, None
        if not rest.startswith("*"):
            raise ValueError(f"expected '*' after {head!r}")
        return head, rest[1:]
    if "*t" in term:
        head, _, tail = term.partition("*t")
        return head, "t" + tail
    if "t" in term:
        raise ValueError(f"bad term {term!r}")
    return term, None


def series_literal(s: LaurentSeries) -> str:
    """Inverse of ``parse_series``."""
    return format_series(s)


def series_pairs(s: LaurentSeries) -> list:
    """Record form: ``[[k, "c_0,...,c_(f-1)"], ...]`` plus ``["O", prec]`` if inexact."""
    out: list = [[k, ",".join(str(x) for x in c.coords)] for k, c in s.terms()]
    if s.prec != INF:
        out.append(["O", int(s.prec)])
    return out


def series_from_pairs(field: GF, pairs: Iterable) -> LaurentSeries:
    terms, prec = {}, INF
    for k, c in pairs:
        if k == "O":
            prec = int(c)
            continue
        terms[int(k)] = field.code([int(x) for x in str(c).split(",")])
    return LaurentSeries.from_dict(field, {k: field.from_code(v) for k, v in terms.items()}, prec)


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

_KEY = re.compile(r"^(p|f|n|precision|modulus|beta|omega\[(\d+)\]|epsilon\[(\d+)\])$")


def parse_spec(text: str, precision: int | None = None) -> TowerSpec:
    """Parse a spec file; ``precision`` overrides the file's value."""
    scalars: dict[str, str] = {}
    omegas: dict[int, str] = {}
    epsilons: dict[int, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec("syntax", f"line {lineno}: expected 'key = value'")
        key, _, value = (part.strip() for part in line.partition("="))
        m = _KEY.match(key)
        if not m:
            raise InvalidSpec("syntax", f"line {lineno}: unknown key {key!r}")
        if m.group(2) is not None:
            table, idx = omegas, int(m.group(2))
        elif m.group(3) is not None:
            table, idx = epsilons, int(m.group(3))
        else:
            table, idx = scalars, key
        if idx in table:
            raise InvalidSpec("syntax", f"line {lineno}: duplicate key {key!r}")
        table[idx] = value
    for key in ("p", "n", "beta"):
        if key not in scalars:
            raise InvalidSpec("syntax", f"missing key {key!r}")
    try:
        p, n = int(scalars["p"]), int(scalars["n"])
        f = int(scalars.get("f", "1"))
        prec = int(scalars.get("precision", str(DEFAULT_PRECISION)))
    except ValueError as exc:
        raise InvalidSpec("syntax", str(exc)) from None
    if precision is not None:
        prec = precision
    try:
        field = GF(p, f)
    except ValueError as exc:
        raise InvalidSpec("field", str(exc)) from None
    if "modulus" in scalars and scalars["modulus"].replace(" ", "") != field.modulus_str():
        raise InvalidSpec("field", f"modulus {scalars['modulus']!r} differs from the fixed "
                                   f"polynomial {field.modulus_str()} for GF({p}^{f})")
    extra = [i for i in list(omegas) + list(epsilons) if not 0 <= i <= n]
    if extra:
        raise InvalidSpec("shape", f"index {extra[0]} out of range 0..{n}")
    missing = [i for i in range(1, n + 1) if i not in omegas]
    if missing:
        raise InvalidSpec("shape", f"missing omega[{missing[0]}]")

    def series(txt: str, what: str) -> LaurentSeries:
        try:
            return parse_series(field, txt)
        except ValueError as exc:
            raise InvalidSpec("syntax", f"{what}: {exc}") from None

    beta = series(scalars["beta"], "beta")
    oms = [series(omegas.get(i, "1"), f"omega[{i}]") for i in range(n + 1)]
    eps = [series(epsilons.get(i, "0"), f"epsilon[{i}]") for i in range(n + 1)]
    return TowerSpec(p, f, n, beta, oms, eps, prec)


def load_spec(path: str, precision: int | None = None) -> TowerSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read spec file {path!r}: {exc.strerror}") from None
    return parse_spec(text, precision)


def emit_spec(spec: TowerSpec, comment: str | None = None) -> str:
    field = spec.field
    lines = [SPEC_HEADER]
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [f"p = {spec.p}", f"f = {spec.f}", f"modulus = {field.modulus_str()}", f"n = {spec.n}",
              f"precision = {spec.precision}", f"beta = {series_literal(spec.beta)}"]
    lines += [f"omega[{i}] = {series_literal(om)}" for i, om in enumerate(spec.omegas)]
    lines += [f"epsilon[{i}] = {series_literal(e)}" for i, e in enumerate(spec.epsilons)]
    return "\n".join(lines) + "\n"


def spec_record(spec: TowerSpec) -> dict:
    return {"kind": "spec", "p": spec.p, "f": spec.f, "n": spec.n, "modulus": spec.field.modulus_str(),
            "precision": spec.precision, "b": spec.b, "beta": series_pairs(spec.beta),
            "omega": [series_pairs(o) for o in spec.omegas],
            "epsilon": [series_pairs(e) for e in spec.epsilons]}


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, LaurentSeries):
        return series_pairs(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if v == INF and isinstance(v, float):
        return "inf"
    if hasattr(v, "numerator") and hasattr(v, "denominator") and not isinstance(v, int):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else int(v.numerator)
    return v


def format_record(rec: dict) -> str:
    """One JSON line with the documented key order for ``rec['kind']``."""
    order = RECORD_FIELDS.get(rec.get("kind", ""), ("kind",))
    keys = [k for k in order if k in rec] + sorted(k for k in rec if k not in order)
    return json.dumps({k: _jsonable(rec[k]) for k in keys}, separators=(", ", ": "))


def parse_records(text: str) -> Iterator[dict]:
    for line in text.splitlines():
        if line.strip():
            yield json.loads(line)
