"""The group algebra K[G] for G = (Z/p)^(n+1), binomials with series arguments,
and truncated exponentiation of 1-units.

Elements are dicts ``{(a_0, ..., a_n): LaurentSeries}`` with absent keys
meaning zero; ``(a_0, ..., a_n)`` stands for sigma_0^a_0 ... sigma_n^a_n.
"""

from __future__ import annotations

import logging
from math import factorial
from typing import Iterable, Sequence

from .errors import NotOneUnit
from .fq import GF
from .series import INF, LaurentSeries
from .tower import TowerElement, apply_shifts, group_add, lincomb

logger = logging.getLogger(__name__)


class GroupAlgebraElement:
    """Element of K[(Z/p)^(n+1)]."""

    __slots__ = ("field", "n", "coeffs")

    def __init__(self, field: GF, n: int, coeffs: dict | None = None):
        self.field = field
        self.n = n
        self.coeffs: dict[tuple[int, ...], LaurentSeries] = {}
        for g, c in (coeffs or {}).items():
            g = tuple(int(a) % field.p for a in g)
            if len(g) != n + 1:
                raise ValueError(f"group index {g} has wrong length")
            if not isinstance(c, LaurentSeries):
                c = LaurentSeries.monomial(field, field(c), 0)
            prev = self.coeffs.get(g)
            c = c if prev is None else prev + c
            if c.is_zero() and c.is_exact():
                self.coeffs.pop(g, None)
            else:
                self.coeffs[g] = c

    @property
    def p(self) -> int:
        return self.field.p

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls, field: GF, n: int) -> "GroupAlgebraElement":
        return cls(field, n)

    @classmethod
    def one(cls, field: GF, n: int) -> "GroupAlgebraElement":
        return cls(field, n, {(0,) * (n + 1): 1})

    @classmethod
    def sigma(cls, field: GF, n: int, i: int, power: int = 1) -> "GroupAlgebraElement":
        g = tuple(power % field.p if k == i else 0 for k in range(n + 1))
        return cls(field, n, {g: 1})

    @classmethod
    def group_element(cls, field: GF, n: int, g: Sequence[int]) -> "GroupAlgebraElement":
        return cls(field, n, {tuple(g): 1})

    # -- arithmetic ------------------------------------------------------------
    def _check(self, other: "GroupAlgebraElement") -> None:
        if other.field is not self.field or other.n != self.n:
            raise ValueError("group algebra elements of different groups")

    def _coerce(self, other):
        if isinstance(other, GroupAlgebraElement):
            self._check(other)
            return other
        if isinstance(other, LaurentSeries):
            return GroupAlgebraElement(self.field, self.n, {(0,) * (self.n + 1): other})
        if isinstance(other, int):
            return GroupAlgebraElement(self.field, self.n, {(0,) * (self.n + 1): other})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.coeffs)
        for g, c in o.coeffs.items():
            out[g] = out[g] + c if g in out else c
        return GroupAlgebraElement(self.field, self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GroupAlgebraElement(self.field, self.n, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s: LaurentSeries) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.field, self.n, {g: c * s for g, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict = {}
        p = self.p
        for g, c in self.coeffs.items():
            for h, d in o.coeffs.items():
                k = group_add(g, h, p)
                prod = c * d
                out[k] = out[k] + prod if k in out else prod
        return GroupAlgebraElement(self.field, self.n, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "GroupAlgebraElement":
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = GroupAlgebraElement.one(self.field, self.n)
        for _ in range(e):
            result = result * self
        return result

    # -- inspection ------------------------------------------------------------
    def augmentation(self) -> LaurentSeries:
        """Sum of the coefficients (the image under sigma -> 1)."""
        total = LaurentSeries.zero(self.field)
        for c in self.coeffs.values():
            total = total + c
        return total

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def is_one_unit(self) -> bool:
        return (self.augmentation() - 1).is_zero()

    def coefficient(self, g: Sequence[int]) -> LaurentSeries:
        g = tuple(a % self.p for a in g)
        return self.coeffs.get(g, LaurentSeries.zero(self.field))

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        from .series import format_series
        if not self.coeffs:
            return "0"
        parts = []
        for g in sorted(self.coeffs):
            mon = "*".join(f"s{i}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(g) if a) or "1"
            parts.append(f"({format_series(self.coeffs[g])})*{mon}")
        return " + ".join(parts)


def binom_scalar(A, i: int, p: int | None = None):
    """A(A-1)...(A-i+1)/i! for 0 <= i < p; A a LaurentSeries or TowerElement."""
    if p is None:
        p = A.field.p
    if not 0 <= i < p:
        raise ValueError(f"binomial index {i} must lie in [0, {p - 1}]")
    if isinstance(A, TowerElement):
        result = A.pres.one()
    else:
        result = LaurentSeries.one(A.field)
    for k in range(i):
        result = result * (A - k)
    inv = pow(factorial(i), -1, p)
    return result.scale(inv) if inv != 1 else result


def truncated_exp(U: GroupAlgebraElement, A: LaurentSeries) -> GroupAlgebraElement:
    """U^[A] = sum_{i<p} binom(A, i) (U - 1)^i for a 1-unit U."""
    if not U.is_one_unit():
        raise NotOneUnit(f"augmentation of {U!r} is not 1")
    D = U - 1
    result = GroupAlgebraElement.one(U.field, U.n)
    power = GroupAlgebraElement.one(U.field, U.n)
    for i in range(1, U.p):
        power = power * D
        result = result + power.scale(binom_scalar(A, i))
    return result


def apply_algebra(theta: GroupAlgebraElement, e: TowerElement, conjugates: dict | None = None) -> TowerElement:
    """sum_g c_g sigma_g(e); ``conjugates`` may cache sigma_g(e)."""
    if not theta.coeffs:
        return e.pres.zero()
    scalars, elems = [], []
    for g, c in theta.coeffs.items():
        conj = conjugates[g] if conjugates is not None and g in conjugates else apply_shifts(e, g)
        scalars.append(c)
        elems.append(conj)
    return lincomb(scalars, elems)


def conjugate_table(e: TowerElement, group: Iterable[tuple[int, ...]]) -> dict:
    return {g: apply_shifts(e, g) for g in group}
