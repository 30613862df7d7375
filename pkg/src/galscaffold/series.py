"""Truncated Laurent series over F_q with absolute precision tracking.

A ``LaurentSeries`` stands for ``sum c_k t^k + O(t^prec)``.  Coefficients
are kept in an ``(f, N)`` int64 array of F_p coordinates; column ``j``
holds the coefficient of ``t^(val0 + j)``.  ``prec`` is the first unknown
exponent, or ``math.inf`` for an exact (finite) series.  Leading and
trailing zero columns are always stripped, so a series with no columns is
zero to its precision and has no detectable valuation.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from . import kernels
from .errors import DivisionByZero, NonzeroUndetectable
from .fq import GF, FqElement

INF = math.inf
DEFAULT_PRECISION = 128

_ONE_ROW = np.zeros(1, dtype=np.int64)


def padd(a, b):
    """Add precisions/valuations where either may be infinite."""
    return INF if (a == INF or b == INF) else a + b


def _as_int(x) -> int:
    return int(x)


def coords_table(field: GF) -> np.ndarray:
    tab = getattr(field, "_coords_table", None)
    if tab is None:
        tab = np.array([field.coords(c) for c in range(field.q)], dtype=np.int64).reshape(field.q, field.f)
        field._coords_table = tab
    return tab


def frobenius_table(field: GF, k: int) -> np.ndarray:
    k %= field.f
    cache = getattr(field, "_frob_tables", None)
    if cache is None:
        cache = field._frob_tables = {}
    if k not in cache:
        cache[k] = np.array([field.frobenius_code(c, k) for c in range(field.q)], dtype=np.int64)
    return cache[k]


def codes_of(field: GF, arr: np.ndarray) -> np.ndarray:
    """Integer codes of the columns of an (f, N) coordinate array."""
    weights = field.p ** np.arange(field.f, dtype=np.int64)
    return weights @ arr


def coeff_mul(field: GF, A: np.ndarray, B: np.ndarray, nout: int) -> np.ndarray:
    """Truncated product of two (f, N) coordinate arrays."""
    out = kernels.conv_pairs(
        np.ascontiguousarray(A[None]), np.ascontiguousarray(B[None]),
        _ONE_ROW, _ONE_ROW, _ONE_ROW, 1, nout, field.p, field.modulus,
    )
    return out[0]


def scalar_mul_array(field: GF, c: FqElement | int, arr: np.ndarray) -> np.ndarray:
    """Multiply every column of a (..., f, N) array by a constant of F_q."""
    if not isinstance(c, FqElement):
        c = field(c)
    if field.f == 1:
        return (arr * c.code) % field.p
    if arr.shape[-1] == 0 or arr.size == 0:
        return arr.copy()
    flat = arr.reshape(-1, field.f, arr.shape[-1])
    cc = np.array(c.coords, dtype=np.int64).reshape(1, field.f, 1)
    idx = np.arange(flat.shape[0], dtype=np.int64)
    out = kernels.conv_pairs(
        np.ascontiguousarray(flat), np.ascontiguousarray(cc), idx, np.zeros_like(idx), idx,
        flat.shape[0], arr.shape[-1], field.p, field.modulus,
    )
    return out.reshape(arr.shape)


class LaurentSeries:
    __slots__ = ("field", "val0", "coeffs", "prec")

    def __init__(self, field: GF, val0: int, coeffs: np.ndarray, prec=INF, _normalized: bool = False):
        self.field = field
        if not _normalized:
            coeffs = np.asarray(coeffs, dtype=np.int64) % field.p
            if coeffs.ndim == 1:
                coeffs = coeffs.reshape(field.f, -1) if field.f > 1 else coeffs.reshape(1, -1)
            if prec != INF:
                prec = _as_int(prec)
                keep = max(0, min(coeffs.shape[1], prec - val0))
                coeffs = coeffs[:, :keep]
            nz = np.flatnonzero(coeffs.any(axis=0))
            if len(nz) == 0:
                coeffs = np.zeros((field.f, 0), dtype=np.int64)
                val0 = prec if prec != INF else 0
            else:
                coeffs = np.ascontiguousarray(coeffs[:, nz[0]:nz[-1] + 1])
                val0 = val0 + int(nz[0])
        self.val0 = int(val0)
        self.coeffs = coeffs
        self.prec = prec

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, field: GF, prec=INF) -> "LaurentSeries":
        return cls(field, 0, np.zeros((field.f, 0), dtype=np.int64), prec)

    @classmethod
    def one(cls, field: GF) -> "LaurentSeries":
        return cls.monomial(field, field.one, 0)

    @classmethod
    def monomial(cls, field: GF, c, k: int, prec=INF) -> "LaurentSeries":
        c = field(c)
        arr = np.array(c.coords, dtype=np.int64).reshape(field.f, 1)
        return cls(field, k, arr, prec)

    @classmethod
    def from_dict(cls, field: GF, terms: Mapping[int, object], prec=INF) -> "LaurentSeries":
        terms = {k: field(v) for k, v in terms.items()}
        if prec != INF:
            terms = {k: v for k, v in terms.items() if k < prec}
        terms = {k: v for k, v in terms.items() if v}
        if not terms:
            return cls.zero(field, prec)
        lo, hi = min(terms), max(terms)
        arr = np.zeros((field.f, hi - lo + 1), dtype=np.int64)
        for k, v in terms.items():
            arr[:, k - lo] = v.coords
        return cls(field, lo, arr, prec)

    def _new(self, val0, coeffs, prec) -> "LaurentSeries":
        return LaurentSeries(self.field, val0, coeffs, prec)

    # -- inspection -----------------------------------------------------
    @property
    def p(self) -> int:
        return self.field.p

    def is_zero(self) -> bool:
        """True if the series is zero to its working precision."""
        return self.coeffs.shape[1] == 0

    def is_exact(self) -> bool:
        return self.prec == INF

    def valuation(self) -> int:
        if self.is_zero():
            raise NonzeroUndetectable(f"series is zero to precision O(t^{self.prec})")
        return self.val0

    def valuation_bound(self):
        """Valuation if detectable, else the precision (a lower bound)."""
        return self.prec if self.is_zero() else self.val0

    def degree(self) -> int:
        """Exponent of the last stored nonzero coefficient."""
        if self.is_zero():
            raise NonzeroUndetectable("zero series has no degree")
        return self.val0 + self.coeffs.shape[1] - 1

    def relative_precision(self):
        return self.prec - self.valuation_bound()

    def coefficient(self, k: int) -> FqElement:
        if k >= self.prec:
            raise NonzeroUndetectable(f"coefficient of t^{k} is beyond precision O(t^{self.prec})")
        j = k - self.val0
        if self.is_zero() or j < 0 or j >= self.coeffs.shape[1]:
            return self.field.zero
        return FqElement(self.field, self.field.code(self.coeffs[:, j]))

    def leading_coefficient(self) -> FqElement:
        return self.coefficient(self.valuation())

    def terms(self) -> list[tuple[int, FqElement]]:
        """Nonzero (exponent, coefficient) pairs in increasing order."""
        if self.is_zero():
            return []
        codes = codes_of(self.field, self.coeffs)
        return [(self.val0 + j, FqElement(self.field, int(c))) for j, c in enumerate(codes) if c]

    def constant_in_fq(self) -> bool:
        return self.is_zero() or (self.val0 == 0 and self.coeffs.shape[1] == 1)

    # -- ring operations --------------------------------------------------
    def _coerce(self, other) -> "LaurentSeries | None":
        if isinstance(other, LaurentSeries):
            if other.field is not self.field:
                raise ValueError("series over different fields")
            return other
        if isinstance(other, (int, np.integer, FqElement)):
            return LaurentSeries.monomial(self.field, other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        if o.is_zero():
            return self.truncate(prec)
        if self.is_zero():
            return o.truncate(prec)
        lo = min(self.val0, o.val0)
        hi = max(self.val0 + self.coeffs.shape[1], o.val0 + o.coeffs.shape[1])
        if prec != INF:
            hi = min(hi, prec)
        if hi <= lo:
            return LaurentSeries.zero(self.field, prec)
        arr = np.zeros((self.field.f, hi - lo), dtype=np.int64)
        for s in (self, o):
            a, b = s.val0 - lo, min(s.val0 + s.coeffs.shape[1], hi) - lo
            if b > a:
                arr[:, a:b] += s.coeffs[:, :b - a]
        return self._new(lo, arr, prec)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.field, self.val0, (-self.coeffs) % self.p, self.prec, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, FqElement)):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        va = INF if self.is_zero() else self.val0
        vb = INF if o.is_zero() else o.val0
        prec = min(padd(va, o.prec), padd(vb, self.prec), padd(self.prec, o.prec))
        if va == INF or vb == INF:
            return LaurentSeries.zero(self.field, prec)
        v = va + vb
        full = self.coeffs.shape[1] + o.coeffs.shape[1] - 1
        nout = full if prec == INF else max(0, min(full, prec - v))
        if nout == 0:
            return LaurentSeries.zero(self.field, prec)
        return self._new(v, coeff_mul(self.field, self.coeffs, o.coeffs, nout), prec)

    __rmul__ = __mul__

    def scale(self, c) -> "LaurentSeries":
        c = self.field(c)
        if not c:
            return LaurentSeries.zero(self.field, self.prec)
        return LaurentSeries(self.field, self.val0, scalar_mul_array(self.field, c, self.coeffs), self.prec,
                             _normalized=True)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by t^k."""
        return LaurentSeries(self.field, self.val0 + k, self.coeffs, padd(self.prec, k), _normalized=True)

    def truncate(self, prec) -> "LaurentSeries":
        """Forget everything at exponents >= prec."""
        if prec >= self.prec:
            return self
        return self._new(self.val0, self.coeffs, prec)

    def truncate_relative(self, rel: int) -> "LaurentSeries":
        """Keep at most ``rel`` coefficients past the valuation."""
        if self.is_zero():
            return self
        return self.truncate(self.val0 + rel)

    def __pow__(self, e: int) -> "LaurentSeries":
        if e < 0:
            return self.invert() ** (-e)
        result = LaurentSeries.one(self.field)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def phi(self, k: int = 1) -> "LaurentSeries":
        """Apply the Frobenius x -> x^p k times."""
        if k == 0:
            return self
        if k < 0:
            raise ValueError("negative Frobenius power on series")
        q = self.p**k
        prec = self.prec * q if self.prec != INF else INF
        if self.is_zero():
            return LaurentSeries.zero(self.field, prec)
        src = self.coeffs
        if self.field.f > 1:
            codes = frobenius_table(self.field, k)[codes_of(self.field, src)]
            src = coords_table(self.field)[codes].T
        n = src.shape[1]
        arr = np.zeros((self.field.f, (n - 1) * q + 1), dtype=np.int64)
        arr[:, ::q] = src
        return LaurentSeries(self.field, self.val0 * q, arr, prec, _normalized=True)

    def frobenius_coefficients(self, k: int) -> "LaurentSeries":
        """Apply c -> c^(p^k) to the coefficients only (k may be negative)."""
        if self.field.f == 1 or k % self.field.f == 0 or self.is_zero():
            return self
        codes = frobenius_table(self.field, k)[codes_of(self.field, self.coeffs)]
        return LaurentSeries(self.field, self.val0, coords_table(self.field)[codes].T.copy(), self.prec,
                             _normalized=True)

    def wp(self) -> "LaurentSeries":
        """The Artin-Schreier operator s^p - s."""
        return self.phi(1) - self

    def invert(self, rel: int | None = None) -> "LaurentSeries":
        """Multiplicative inverse with the same relative precision.

        Exact series that are not monomials have infinite inverses; those are
        cut to ``rel`` coefficients past the valuation (default
        ``DEFAULT_PRECISION``).
        """
        if self.is_zero():
            raise DivisionByZero(f"inverting a series that is zero to O(t^{self.prec})")
        v = self.val0
        n_have = self.coeffs.shape[1]
        if n_have == 1:
            c = self.leading_coefficient().inverse()
            return LaurentSeries.monomial(self.field, c, -v, padd(self.prec, -2 * v))
        rel = min(self.prec - v, rel if rel is not None else (DEFAULT_PRECISION if self.prec == INF else INF))
        rel = int(rel)
        u = LaurentSeries(self.field, 0, self.coeffs, rel, _normalized=True)
        g = LaurentSeries.monomial(self.field, self.leading_coefficient().inverse(), 0, 1)
        have = 1
        while have < rel:
            have = min(2 * have, rel)
            ut = u.truncate(have)
            g = LaurentSeries(self.field, 0, g.coeffs, have, _normalized=True)
            g = (g * (2 - ut * g)).truncate(have)
        return LaurentSeries(self.field, g.val0 - v, g.coeffs, -v + rel, _normalized=True)

    def __truediv__(self, other):
        if isinstance(other, (int, np.integer, FqElement)):
            return self.scale(self.field(other).inverse())
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.invert()

    def divide(self, other: "LaurentSeries", rel: int | None = None) -> "LaurentSeries":
        return self * other.invert(rel)

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None

    def identical(self, other: "LaurentSeries") -> bool:
        """Same stored data and precision (stricter than ``==``)."""
        return (self.field is other.field and self.prec == other.prec and self.val0 == other.val0
                and np.array_equal(self.coeffs, other.coeffs))

    def __repr__(self) -> str:
        return format_series(self)


def format_series(s: LaurentSeries) -> str:
    parts = []
    for k, c in s.terms():
        cs = repr(c)
        mon = "1" if k == 0 else ("t" if k == 1 else f"t^{k}")
        if k == 0:
            parts.append(cs if "+" not in cs else f"({cs})")
        elif cs == "1":
            parts.append(mon)
        else:
            parts.append(f"{cs}*{mon}" if "+" not in cs else f"({cs})*{mon}")
    if s.prec != INF:
        parts.append(f"O(t^{s.prec})")
    return " + ".join(parts) if parts else "0"


# -- module-level operations with the names used across the package ---------

def series_valuation(s: LaurentSeries) -> int:
    return s.valuation()


def series_wp(s: LaurentSeries) -> LaurentSeries:
    return s.wp()


def series_phi(s: LaurentSeries, k: int) -> LaurentSeries:
    return s.phi(k)


def series_invert(s: LaurentSeries) -> LaurentSeries:
    return s.invert()


def solve_wp_in_fq(c: FqElement) -> FqElement:
    return c.field.solve_wp(c)
