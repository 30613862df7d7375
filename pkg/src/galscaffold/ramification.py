"""Break numbers: formulas from the defining data, first-principles
computation from the ramification groups, Herbrand conversion and the
error-term bound."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .errors import BoundViolated
from .series import INF
from .tower import Tower, TowerSpec, apply_shifts, group_elements

logger = logging.getLogger(__name__)


@dataclass
class BreakData:
    p: int
    n: int
    b: int
    m: list[int]          # m_1 .. m_n
    lower: list[int]      # b_(0) .. b_(n)
    upper: list[int]      # u_(0) .. u_(n)

    @property
    def b_m(self) -> int:
        return self.lower[-1]

    def distinct_lower(self) -> list[tuple[int, int]]:
        """Distinct lower breaks with the order of the ramification group there."""
        out = []
        for i, v in enumerate(self.lower):
            if not out or out[-1][0] != v:
                out.append((v, self.p ** (self.n + 1 - i)))
        return out

    def distinct_upper(self) -> list[int]:
        out = []
        for u in self.upper:
            if not out or out[-1] != u:
                out.append(u)
        return out

    def rows(self) -> list[tuple[int, int, int, int | None]]:
        """(index, lower, upper, m_i) with m_0 undefined."""
        return [(i, self.lower[i], self.upper[i], None if i == 0 else self.m[i - 1]) for i in range(self.n + 1)]


def breaks_from_spec(spec: TowerSpec) -> BreakData:
    p, n = spec.p, spec.n
    b = -spec.beta.valuation()
    vals = [om.valuation() for om in spec.omegas]
    m = [vals[i - 1] - vals[i] for i in range(1, n + 1)]
    lower = [b + p**n * sum(p**j * m[j - 1] for j in range(1, i + 1)) for i in range(n + 1)]
    upper = [b + p**n * sum(m[j - 1] for j in range(1, i + 1)) for i in range(n + 1)]
    data = BreakData(p, n, b, m, lower, upper)
    check_congruences(data)
    return data


def check_congruences(data: BreakData) -> None:
    """b_(i) = b_(n) mod p^(i+1), and all distinct breaks agree mod p."""
    p, n = data.p, data.n
    for i, bi in enumerate(data.lower):
        if (bi - data.b_m) % p ** (i + 1):
            raise AssertionError(f"congruence fails: b_({i}) = {bi} vs b_({n}) = {data.b_m} mod {p ** (i + 1)}")
    for bi in data.lower:
        if (bi - data.lower[0]) % p:
            raise AssertionError(f"breaks {data.lower} not congruent mod {p}")


@dataclass
class DirectBreaks:
    values: list[int]                                 # distinct breaks, sorted
    evaluated: list[tuple[tuple[int, ...], int]]      # (group index, i(sigma))
    exhaustive: bool

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for _, v in self.evaluated:
            out[v] = out.get(v, 0) + 1
        return dict(sorted(out.items()))


def break_representatives(p: int, n: int) -> list[tuple[int, ...]]:
    """The generators sigma_i and one element sigma_i ... sigma_n per layer."""
    reps = []
    for i in range(n + 1):
        reps.append(tuple(1 if k == i else 0 for k in range(n + 1)))
        layer = tuple(1 if k >= i else 0 for k in range(n + 1))
        if layer not in reps:
            reps.append(layer)
    return reps


def breaks_direct(tower: Tower, exhaustive: bool = False) -> DirectBreaks:
    """i(sigma) = v_L((sigma - 1) pi_L) - 1 measured with the norm oracle."""
    pi = tower.uniformizer()
    if exhaustive:
        gs = [g for g in group_elements(tower.p, tower.n) if any(g)]
    else:
        gs = break_representatives(tower.p, tower.n)
    evaluated = []
    for g in gs:
        diff = apply_shifts(pi, g) - pi
        evaluated.append((g, tower.valuation(diff) - 1))
    values = sorted({v for _, v in evaluated})
    logger.debug("direct breaks %s from %d group elements", values, len(gs))
    return DirectBreaks(values, evaluated, exhaustive)


def herbrand_lower_to_upper(lower: Sequence[int], orders: Sequence[int]) -> list[int]:
    """Upper breaks from strictly increasing lower breaks and |G_{b_k}|."""
    if not lower:
        return []
    g0 = orders[0]
    out = [Fraction(lower[0])]
    for k in range(1, len(lower)):
        out.append(out[-1] + Fraction((lower[k] - lower[k - 1]) * orders[k], g0))
    return [int(u) if u.denominator == 1 else u for u in out]


def herbrand_upper_to_lower(upper: Sequence, orders: Sequence[int]) -> list[int]:
    if not upper:
        return []
    g0 = orders[0]
    out = [Fraction(upper[0])]
    for k in range(1, len(upper)):
        out.append(out[-1] + (Fraction(upper[k]) - Fraction(upper[k - 1])) * Fraction(g0, orders[k]))
    return [int(v) if v.denominator == 1 else v for v in out]


@dataclass
class BoundRow:
    i: int
    valuation: object        # v_K(epsilon_i) or INF
    rhs: Fraction
    rhs_breaks: Fraction     # same bound via ramification numbers
    passed: bool
    reducible: bool          # epsilon_i lies in the image of wp (so can be dropped)


@dataclass
class BoundReport:
    rows: list[BoundRow] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def error_bound_rhs(data: BreakData, i: int) -> Fraction:
    p, n, m = data.p, data.n, data.m
    rhs = Fraction(-data.b, p**n)
    rhs -= sum(p**j * m[j - 1] for j in range(1, i + 1))
    rhs += sum((p**n - p**j) * m[j - 1] for j in range(i + 1, n + 1))
    return rhs


def check_error_bound(spec: TowerSpec, data: BreakData | None = None, strict: bool = True) -> BoundReport:
    data = data or breaks_from_spec(spec)
    p, n = data.p, data.n
    report = BoundReport()
    for i in range(1, n + 1):
        rhs = error_bound_rhs(data, i)
        alt = Fraction(-data.b_m, p**n) + data.upper[n] - data.upper[i]
        if rhs != alt:
            raise AssertionError(f"bound forms disagree at i={i}: {rhs} vs {alt}")
        eps = spec.epsilons[i]
        v = INF if eps.is_zero() else eps.valuation()
        passed = v == INF or v > rhs
        if v == INF or v > 0:
            reducible = True
        elif v == 0:
            c = eps.coefficient(0)
            reducible = c.field.trace(c) == 0
        else:
            reducible = False
        report.rows.append(BoundRow(i, v, rhs, alt, passed, reducible))
        if not passed and strict:
            raise BoundViolated(i, f"v_K(epsilon_{i}) = {v} <= {rhs}")
    return report
