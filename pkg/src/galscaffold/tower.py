"""Artin-Schreier towers L = K(x_0, ..., x_n) over K = F_q((t)).

An element of L is stored densely: an int64 array of shape
``(p,)*(n+1) + (f, N)`` whose entry ``[e_0, ..., e_n, :, j]`` is the
coefficient of ``t^(val0 + j) * y_0^e_0 ... y_n^e_n``, together with one
absolute precision shared by all monomial coefficients.

A ``Presentation`` fixes the generators ``y_j`` of such a tower: the
reduction rule ``y_j^p = y_j + r_j`` with ``r_j`` a polynomial in the lower
generators, and the Galois action ``sigma_i y_j = y_j + d_ij`` with
``d_ij`` in K.  The raw presentation of a spec uses the generators
``x_j`` (``r_j`` in K, ``d = I``).  ``Tower.adapted`` is the triangular
change of variables to the elements ``X_j^(j)``; it is only a different
coordinate system for the same field and is what the valuation oracle uses,
because norms computed in it do not suffer the massive cancellation the
x-basis produces.
"""

from __future__ import annotations

import functools
import itertools
import logging
import random
from dataclasses import dataclass, field as dc_field
from math import comb, gcd
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import InvalidSpec, NonzeroUndetectable, PrecisionLoss
from .fq import GF, FqElement, rank_mod_p
from .series import INF, DEFAULT_PRECISION, LaurentSeries, padd

logger = logging.getLogger(__name__)

GroupElementIndex = tuple  # (a_0, ..., a_n) with 0 <= a_i < p


def group_elements(p: int, n: int) -> list[tuple[int, ...]]:
    """All of (Z/p)^(n+1), ordered with a_0 varying slowest."""
    return list(itertools.product(range(p), repeat=n + 1))


def group_add(g: Sequence[int], h: Sequence[int], p: int) -> tuple[int, ...]:
    return tuple((a + b) % p for a, b in zip(g, h))


def generator_index(i: int, n: int) -> tuple[int, ...]:
    return tuple(1 if k == i else 0 for k in range(n + 1))


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

@dataclass
class TowerSpec:
    """Defining data: wp(x_i) = phi^n(Omega_i) * beta + epsilon_i."""

    p: int
    f: int
    n: int
    beta: LaurentSeries
    omegas: list[LaurentSeries]
    epsilons: list[LaurentSeries] = dc_field(default_factory=list)
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not self.epsilons:
            field = GF(self.p, self.f)
            self.epsilons = [LaurentSeries.zero(field) for _ in range(self.n + 1)]

    @property
    def field(self) -> GF:
        return GF(self.p, self.f)

    @property
    def b(self) -> int:
        return -self.beta.valuation()

    def rhs(self, i: int) -> LaurentSeries:
        """The Artin-Schreier constant phi^n(Omega_i) beta + epsilon_i."""
        return self.omegas[i].phi(self.n) * self.beta + self.epsilons[i]

    def same_as(self, other: "TowerSpec") -> bool:
        if (self.p, self.f, self.n, self.precision) != (other.p, other.f, other.n, other.precision):
            return False
        pairs = [(self.beta, other.beta)] + list(zip(self.omegas, other.omegas)) + list(zip(self.epsilons, other.epsilons))
        return len(self.omegas) == len(other.omegas) and all(a.identical(b) for a, b in pairs)


def validate_spec(spec: TowerSpec) -> None:
    """Raise ``InvalidSpec`` naming the first violated defining condition."""
    p, n = spec.p, spec.n
    field = spec.field
    if n < 0:
        raise InvalidSpec("shape", "n must be non-negative")
    if len(spec.omegas) != n + 1 or len(spec.epsilons) != n + 1:
        raise InvalidSpec("shape", f"need {n + 1} omegas and epsilons")
    for s in [spec.beta, *spec.omegas, *spec.epsilons]:
        if s.field is not field:
            raise InvalidSpec("shape", "all series must live over the residue field F_q")
    if spec.precision < 1:
        raise InvalidSpec("precision", "precision must be positive")
    if spec.beta.is_zero():
        raise InvalidSpec("beta", "beta is zero to working precision")
    b = -spec.beta.valuation()
    if b <= 0:
        raise InvalidSpec("beta", f"v_K(beta) = {-b} must be negative")
    if gcd(b, p) != 1:
        raise InvalidSpec("gcd", f"gcd(b, p) = gcd({b}, {p}) != 1")
    if not (spec.omegas[0] - 1).is_zero() or not spec.omegas[0].is_exact():
        raise InvalidSpec("omega0", "Omega_0 must be exactly 1")
    vals = []
    for i, om in enumerate(spec.omegas):
        if om.is_zero():
            raise InvalidSpec("ordering", f"Omega_{i} is zero to working precision")
        vals.append(om.valuation())
    for i in range(1, n + 1):
        if vals[i] > vals[i - 1]:
            raise InvalidSpec("ordering", f"v_K(Omega_{i}) = {vals[i]} > v_K(Omega_{i - 1}) = {vals[i - 1]}")
    # runs of equal valuation need F_p-independent leading coefficients
    for v, run in itertools.groupby(range(n + 1), key=lambda i: vals[i]):
        run = list(run)
        lcs = [spec.omegas[i].leading_coefficient().coords for i in run]
        if rank_mod_p(lcs, p) < len(run):
            raise InvalidSpec("independence",
                              f"leading coefficients of Omega_{run[0]}..Omega_{run[-1]} (valuation {v}) "
                              "are F_p-dependent")
    if not spec.epsilons[0].is_zero() or spec.epsilons[0].prec != INF and spec.epsilons[0].prec < 1:
        raise InvalidSpec("epsilon0", "epsilon_0 must be 0")
    for i in range(1, n + 1):
        eps = spec.epsilons[i]
        bound = p**n * vals[i] - b
        if eps.valuation_bound() <= bound:
            raise InvalidSpec("epsilon-size",
                              f"v_K(epsilon_{i}) = {eps.valuation_bound()} must exceed v_K(phi^n(Omega_{i}) beta) = {bound}")


# ---------------------------------------------------------------------------
# presentations and elements
# ---------------------------------------------------------------------------

class Presentation:
    """Generators y_0..y_n with y_j^p = y_j + r_j and sigma_i y_j = y_j + d_ij."""

    def __init__(self, field: GF, n: int, name: str = "x"):
        self.field = field
        self.p = field.p
        self.f = field.f
        self.n = n
        self.name = name
        self.shape = (self.p,) * (n + 1)
        self.M = self.p ** (n + 1)
        self.box = 3 * self.p
        self.relations: list[TowerElement] = []
        self.shifts: list[list[LaurentSeries]] = []
        self._relation_terms: list[list[tuple[tuple[int, ...], LaurentSeries]]] = []
        self.set_weights([0] * (n + 1), 1)

    def set_weights(self, weights: Sequence[int], denom: int) -> None:
        """Precision bookkeeping weights.

        An element with precision P knows the coefficient of y^m modulo
        t^ceil((P + W_m) / denom) with W_m = sum_j m_j weights[j].  Any
        non-negative weights give rigorous bounds; weights close to
        -denom * v(y_j) keep the losses during reduction near zero.
        """
        if any(w < 0 for w in weights) or denom < 1:
            raise ValueError("precision weights must be non-negative")
        self.weights = [int(w) for w in weights]
        self.denom = int(denom)
        self.W = self._weight_grid(self.shape)
        self.Wbox = self._weight_grid((self.box,) * (self.n + 1))

    def _weight_grid(self, shape) -> np.ndarray:
        grid = np.zeros(shape, dtype=np.int64)
        for j, w in enumerate(self.weights):
            ax = [1] * (self.n + 1)
            ax[j] = shape[j]
            grid = grid + w * np.arange(shape[j], dtype=np.int64).reshape(ax)
        return grid

    def t_precision(self, P, Wm: int):
        """t-adic precision of the coefficient of a monomial of weight Wm."""
        if P == INF:
            return INF
        return -((-(int(P) + int(Wm))) // self.denom)

    def set_relations(self, relations: list["TowerElement"], shifts: list[list[LaurentSeries]]) -> None:
        self.relations = relations
        self.shifts = shifts
        self._relation_terms = []
        for j, r in enumerate(relations):
            terms = []
            for mono, c in r.coefficients().items():
                if any(mono[k] for k in range(j, self.n + 1)):
                    raise ValueError(f"relation for y_{j} involves y_k with k >= {j}")
                terms.append((mono, c))
            if not terms:
                terms.append(((0,) * (self.n + 1), LaurentSeries.zero(self.field, r.prec)))
            self._relation_terms.append(terms)

    @functools.cached_property
    def pair_index(self) -> np.ndarray:
        """Flat index in the (box,)^(n+1) work array of the product of monomials a, b."""
        expo = np.array(list(np.ndindex(*self.shape)), dtype=np.int64).reshape(self.M, self.n + 1)
        summed = expo[:, None, :] + expo[None, :, :]
        return np.ravel_multi_index(tuple(summed[..., k] for k in range(self.n + 1)), (self.box,) * (self.n + 1))

    def monomials(self) -> list[tuple[int, ...]]:
        return list(np.ndindex(*self.shape))

    def gen(self, j: int) -> "TowerElement":
        mono = tuple(1 if k == j else 0 for k in range(self.n + 1))
        return TowerElement.from_coefficients(self, {mono: LaurentSeries.one(self.field)})

    def constant(self, c) -> "TowerElement":
        if not isinstance(c, LaurentSeries):
            c = LaurentSeries.monomial(self.field, self.field(c), 0)
        return TowerElement.from_coefficients(self, {(0,) * (self.n + 1): c})

    def zero(self, prec=INF) -> "TowerElement":
        return TowerElement(self, 0, np.zeros(self.shape + (self.f, 0), dtype=np.int64), prec)

    def one(self) -> "TowerElement":
        return self.constant(1)

    def shift_vector(self, g: Sequence[int]) -> list[LaurentSeries]:
        """d_j(g) with sigma_g y_j = y_j + d_j(g)."""
        out = []
        for j in range(self.n + 1):
            acc = LaurentSeries.zero(self.field)
            for i, a in enumerate(g):
                if a % self.p:
                    acc = acc + self.shifts[i][j].scale(a % self.p)
            out.append(acc)
        return out


def _as_int_constant(s: LaurentSeries) -> int | None:
    """The F_p value of an exact constant series, else None."""
    if not s.is_exact():
        return None
    if s.is_zero():
        return 0
    if s.val0 != 0 or s.coeffs.shape[1] != 1:
        return None
    c = s.coeffs[:, 0]
    if c[1:].any():
        return None
    return int(c[0])


def _weighted_valuation(data: np.ndarray, base: int, Warr: np.ndarray, denom: int):
    """min over nonzero monomials of denom * v_t(coefficient) - W_m."""
    N = data.shape[-1]
    if N == 0:
        return INF
    rows = data.reshape(Warr.size, -1, N).any(axis=1)
    live = rows.any(axis=1)
    if not live.any():
        return INF
    first = np.argmax(rows[live], axis=1)
    return int((denom * (base + first) - Warr.reshape(-1)[live]).min())


def _mask_to_precision(data: np.ndarray, base: int, Warr: np.ndarray, P, denom: int) -> np.ndarray:
    """Zero the digits of each monomial past its own t-precision."""
    if P == INF or data.shape[-1] == 0:
        return data
    limit = -((-(int(P) + Warr)) // denom) - base
    cols = np.arange(data.shape[-1], dtype=np.int64)
    mask = cols >= limit[..., None, None]
    return np.where(mask, 0, data)


class _Work:
    """Scratch array over an enlarged exponent box used during reductions."""

    def __init__(self, pres: Presentation, base: int, arr: np.ndarray, prec):
        self.pres = pres
        self.base = base
        self.arr = arr  # shape (box,)^(n+1) + (f, N)
        self.prec = prec

    def _grow(self, lo: int, hi: int) -> None:
        """Make the stored t-range cover [lo, hi)."""
        N = self.arr.shape[-1]
        front = max(0, self.base - lo)
        back = max(0, hi - (self.base + N))
        if front or back:
            pad = [(0, 0)] * (self.arr.ndim - 1) + [(front, back)]
            self.arr = np.pad(self.arr, pad)
            self.base -= front

    def add_product(self, dest: tuple, slab: np.ndarray, slab_base: int, slab_W: np.ndarray,
                    c: LaurentSeries, dW: int, scalar: int = 1) -> None:
        """arr[dest] += scalar * c * slab; column 0 of slab is the exponent slab_base.

        ``slab_W`` holds the weights of the source monomials and ``dW`` is the
        weight drop from source to destination monomial.
        """
        pres = self.pres
        D = pres.denom
        v_slab = _weighted_valuation(slab, slab_base, slab_W, D) if slab_W.size else INF
        cp = INF if c.prec == INF else D * c.prec
        if v_slab == INF and c.is_zero():
            contrib_prec = padd(padd(self.prec, cp), dW)
        else:
            vc = INF if c.is_zero() else D * c.val0
            contrib_prec = padd(min(padd(v_slab, cp), padd(vc, self.prec), padd(self.prec, cp)), dW)
        self.prec = min(self.prec, contrib_prec)
        if v_slab == INF or c.is_zero():
            return
        new_base = slab_base + c.val0
        N = slab.shape[-1]
        nfull = N + c.coeffs.shape[1] - 1
        if self.prec == INF:
            nout = nfull
        else:
            nout = min(nfull, pres.t_precision(self.prec, int(slab_W.max()) - dW) - new_base)
        if nout <= 0:
            return
        flat = np.ascontiguousarray(slab.reshape(-1, pres.f, N))
        rows = np.flatnonzero(flat.any(axis=(1, 2))).astype(np.int64)
        prod = kernels.conv_pairs(flat, np.ascontiguousarray(c.coeffs[None]), rows, np.zeros_like(rows), rows,
                                  flat.shape[0], nout, pres.p, pres.field.modulus)
        if scalar % pres.p != 1:
            prod = (prod * scalar) % pres.p
        prod = prod.reshape(slab.shape[:-1] + (nout,))
        self._grow(new_base, new_base + nout)
        off = new_base - self.base
        self.arr[dest + (Ellipsis, slice(off, off + nout))] += prod

    def add_slab(self, dest: tuple, slab: np.ndarray, slab_base: int) -> None:
        off = slab_base - self.base
        self.arr[dest + (Ellipsis, slice(off, off + slab.shape[-1]))] += slab

    def reduce(self, reach: list[int] | None = None) -> None:
        """Eliminate exponents >= p, top generator first.

        ``reach[j]`` bounds the exponents of y_j that can occur.  Slabs within
        reach whose stored digits vanish still count for precision when the
        work array is inexact: they are O(t^prec), and multiplying them by a
        relation coefficient of negative valuation costs precision.
        """
        pres = self.pres
        p, n, S = pres.p, pres.n, pres.box
        Wbox = pres.Wbox
        reach = list(reach) if reach is not None else [S - 1] * (n + 1)
        for j in range(n, -1, -1):
            terms = pres._relation_terms[j]
            top = min(reach[j], S - 1)
            nred = max(0, top - p + 1)
            for i in range(j):
                grow = max(mono[i] for mono, _ in terms)
                reach[i] = min(S - 1, reach[i] + grow * nred)
            wj = pres.weights[j]
            if (p - 1) * wj < 0:
                self.prec = padd(self.prec, (p - 1) * wj)
            for k in range(top, p - 1, -1):
                idx = (slice(None),) * j + (k,)
                slab = self.arr[idx]
                slab_W = Wbox[idx]
                if not slab.any():
                    if self.prec != INF:
                        for mono, c in terms:
                            self.add_product((), slab[..., :0], self.base, np.zeros(0, dtype=np.int64), c,
                                             p * wj - sum(m * w for m, w in zip(mono, pres.weights)))
                    continue
                slab = slab.copy()
                slab_base = self.base
                self.arr[idx] = 0
                # y^k = y^(k-p+1) + r * y^(k-p)
                self.add_slab((slice(None),) * j + (k - p + 1,), slab, slab_base)
                for mono, c in terms:
                    dest = (slice(None),) * j + (k - p,)
                    shifted_dest = list(dest)
                    # shift the lower axes by the exponents of the relation monomial
                    sub = [slice(None)] * (slab.ndim)
                    for i in range(j):
                        if mono[i]:
                            if slab[(slice(None),) * i + (slice(S - mono[i], S),)].any():
                                raise OverflowError("exponent box too small during reduction")
                            shifted_dest[i] = slice(mono[i], S)
                            sub[i] = slice(0, S - mono[i])
                    dW = p * wj - sum(m * w for m, w in zip(mono, pres.weights))
                    self.add_product(tuple(shifted_dest), slab[tuple(sub)], slab_base, slab_W[tuple(sub[:n])], c, dW)
            if self.arr[(slice(None),) * j + (slice(top + 1, None),)].any():
                raise OverflowError(f"exponent of y_{j} exceeded its reach {top}")
        self.arr %= p

    def to_element(self) -> "TowerElement":
        pres = self.pres
        core = self.arr[(slice(0, pres.p),) * (pres.n + 1)]
        if self.arr.shape[0] > pres.p:
            outside = self.arr.copy()
            outside[(slice(0, pres.p),) * (pres.n + 1)] = 0
            if (outside % pres.p).any():
                raise AssertionError("unreduced monomials left after reduction")
        return TowerElement(pres, self.base, core, self.prec)


class TowerElement:
    """Element of an Artin-Schreier tower in a given presentation."""

    __slots__ = ("pres", "val0", "data", "prec")

    def __init__(self, pres: Presentation, val0: int, data: np.ndarray, prec=INF, _normalized: bool = False):
        self.pres = pres
        if not _normalized:
            data = np.asarray(data, dtype=np.int64) % pres.p
            if prec != INF:
                prec = int(prec)
                keep = max(0, min(data.shape[-1], pres.t_precision(prec, int(pres.W.max())) - val0))
                data = _mask_to_precision(data[..., :keep], val0, pres.W, prec, pres.denom)
            ncols = data.shape[-1]
            nzcols = np.flatnonzero(data.reshape(-1, ncols).any(axis=0)) if ncols else []
            if len(nzcols) == 0:
                data = np.zeros(pres.shape + (pres.f, 0), dtype=np.int64)
                val0 = 0
            else:
                data = np.ascontiguousarray(data[..., nzcols[0]:nzcols[-1] + 1])
                val0 = val0 + int(nzcols[0])
        self.val0 = int(val0)
        self.data = data
        self.prec = prec

    # -- construction ------------------------------------------------------
    @classmethod
    def from_coefficients(cls, pres: Presentation, coeffs: dict, prec=INF) -> "TowerElement":
        items = [(tuple(m), c) for m, c in coeffs.items()]
        for m, c in items:
            if c.prec != INF:
                prec = min(prec, pres.denom * c.prec - int(pres.W[m]))
        nonzero = [(m, c) for m, c in items if not c.is_zero()]
        if not nonzero:
            return pres.zero(prec)
        lo = min(c.val0 for _, c in nonzero)
        hi = max(c.val0 + c.coeffs.shape[1] for _, c in nonzero)
        data = np.zeros(pres.shape + (pres.f, hi - lo), dtype=np.int64)
        for m, c in nonzero:
            data[m + (Ellipsis, slice(c.val0 - lo, c.val0 - lo + c.coeffs.shape[1]))] += c.coeffs
        return cls(pres, lo, data, prec)

    def _new(self, val0, data, prec) -> "TowerElement":
        return TowerElement(self.pres, val0, data, prec)

    # -- inspection --------------------------------------------------------
    @property
    def field(self) -> GF:
        return self.pres.field

    def flat(self) -> np.ndarray:
        return self.data.reshape(self.pres.M, self.pres.f, self.data.shape[-1])

    def is_zero(self) -> bool:
        return self.data.shape[-1] == 0

    def t_valuation(self):
        """Smallest t-exponent among the coefficients (INF if zero to precision)."""
        return INF if self.is_zero() else self.val0

    def weighted_valuation(self):
        """min_m denom * v_t(a_m) - W_m, in the units of the precision."""
        return _weighted_valuation(self.data, self.val0, self.pres.W, self.pres.denom)

    def coefficient(self, mono: Sequence[int]) -> LaurentSeries:
        mono = tuple(mono)
        return LaurentSeries(self.field, self.val0, self.data[mono],
                             self.pres.t_precision(self.prec, int(self.pres.W[mono])))

    def coefficients(self) -> dict[tuple[int, ...], LaurentSeries]:
        """Nonzero monomial coefficients."""
        out = {}
        if self.is_zero():
            return out
        live = self.data.reshape(self.pres.M, -1).any(axis=1)
        monos = self.pres.monomials()
        for k in np.flatnonzero(live):
            out[monos[k]] = self.coefficient(monos[k])
        return out

    def constant_coefficient(self) -> LaurentSeries:
        return self.coefficient((0,) * (self.pres.n + 1))

    def is_in_base(self) -> bool:
        """Only the constant monomial survives (to precision)."""
        return not self.data.reshape(self.pres.M, -1)[1:].any()

    def in_subfield(self, j: int) -> bool:
        """Independent of y_j, ..., y_n (to precision)."""
        sl = (slice(None),) * j + (slice(1, None),)
        for k in range(j, self.pres.n + 1):
            sl = (slice(None),) * k + (slice(1, None),)
            if self.data[sl].any():
                return False
        return True

    def truncate(self, prec) -> "TowerElement":
        if prec >= self.prec:
            return self
        return self._new(self.val0, self.data, prec)

    def truncate_relative(self, rel: int) -> "TowerElement":
        """Keep ``rel`` units of precision past the weighted valuation."""
        if self.is_zero():
            return self
        return self.truncate(self.weighted_valuation() + rel)

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TowerElement):
            if other.pres is not self.pres:
                raise ValueError("elements of different presentations")
            return other
        if isinstance(other, (int, np.integer, FqElement, LaurentSeries)):
            return self.pres.constant(other)
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
        hi = max(self.val0 + self.data.shape[-1], o.val0 + o.data.shape[-1])
        if prec != INF:
            hi = min(hi, self.pres.t_precision(prec, int(self.pres.W.max())))
        if hi <= lo:
            return self.pres.zero(prec)
        data = np.zeros(self.pres.shape + (self.pres.f, hi - lo), dtype=np.int64)
        for s in (self, o):
            a = s.val0 - lo
            b = min(s.val0 + s.data.shape[-1], hi) - lo
            if b > a:
                data[..., a:b] += s.data[..., :b - a]
        return self._new(lo, data, prec)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.pres, self.val0, (-self.data) % self.pres.p, self.prec, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TowerElement":
        """Multiply by a scalar from K."""
        if isinstance(c, LaurentSeries):
            return lincomb([c], [self])
        c = self.field(c)
        if not c:
            return self.pres.zero(self.prec)
        from .series import scalar_mul_array
        return TowerElement(self.pres, self.val0, scalar_mul_array(self.field, c, self.data), self.prec,
                            _normalized=True)

    def shift(self, k: int) -> "TowerElement":
        """Multiply by t^k."""
        return TowerElement(self.pres, self.val0 + k, self.data, padd(self.prec, self.pres.denom * k),
                            _normalized=True)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer, FqElement, LaurentSeries)):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        pres = self.pres
        wa, wb = self.weighted_valuation(), o.weighted_valuation()
        prec = min(padd(wa, o.prec), padd(wb, self.prec), padd(self.prec, o.prec))
        if wa == INF or wb == INF:
            return pres.zero(prec)
        base = self.val0 + o.val0
        nfull = self.data.shape[-1] + o.data.shape[-1] - 1
        nout = nfull if prec == INF else min(nfull, pres.t_precision(prec, int(pres.Wbox.max())) - base)
        if nout <= 0:
            return pres.zero(prec)
        A, B = self.flat(), o.flat()
        ra = np.flatnonzero(A.any(axis=(1, 2)))
        rb = np.flatnonzero(B.any(axis=(1, 2)))
        ia = np.repeat(ra, len(rb)).astype(np.int64)
        ib = np.tile(rb, len(ra)).astype(np.int64)
        io = pres.pair_index[ia, ib].astype(np.int64)
        nbox = pres.box ** (pres.n + 1)
        ext = kernels.conv_pairs(A, B, ia, ib, io, nbox, nout, pres.p, pres.field.modulus)
        work = _Work(pres, base, ext.reshape((pres.box,) * (pres.n + 1) + (pres.f, nout)), prec)
        work.reduce([2 * pres.p - 2] * (pres.n + 1))
        return work.to_element()

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "TowerElement":
        if e < 0:
            raise ValueError("negative powers of tower elements are not supported")
        result = self.pres.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def substitute(self, j: int, d: LaurentSeries) -> "TowerElement":
        """Replace y_j by y_j + d with d in K."""
        pres = self.pres
        p = pres.p
        k_int = _as_int_constant(d)
        if k_int is not None:
            if k_int % p == 0:
                return self
            T = np.zeros((p, p), dtype=np.int64)
            for a in range(p):
                for k in range(a, p):
                    T[a, k] = comb(k, a) * pow(k_int, k - a, p) % p
            moved = np.moveaxis(self.data, j, 0)
            out = np.tensordot(T, moved, axes=([1], [0])) % p
            # digits move to monomials of smaller weight, so re-mask
            return TowerElement(pres, self.val0, np.ascontiguousarray(np.moveaxis(out, 0, j)), self.prec)
        powers = [LaurentSeries.one(self.field)]
        for _ in range(p - 1):
            powers.append(powers[-1] * d)
        wj = pres.weights[j]
        # contributions go to a fresh accumulator seeded with the original
        acc = _Work(pres, self.val0, self.data.copy(), self.prec)
        for k in range(1, p):
            idx = (slice(None),) * j + (k,)
            slab = self.data[idx]
            if not slab.any() and self.prec == INF:
                continue
            for a in range(k):
                coef = comb(k, a) % p
                if coef:
                    acc.add_product((slice(None),) * j + (a,), slab, self.val0, pres.W[idx], powers[k - a],
                                    (k - a) * wj, coef)
        acc.arr %= p
        return TowerElement(pres, acc.base, acc.arr, acc.prec)

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).is_zero()

    __hash__ = None

    def __repr__(self) -> str:
        from .series import format_series
        if self.is_zero():
            return "0" if self.prec == INF else f"O({self._prec_str()})"
        names = self.pres.name
        parts = []
        for mono, c in self.coefficients().items():
            c_str = format_series(LaurentSeries(self.field, c.val0, c.coeffs, INF, _normalized=True))
            mon = "*".join(f"{names}{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mono) if e)
            parts.append(f"({c_str})" + (f"*{mon}" if mon else ""))
        tail = "" if self.prec == INF else f" + O({self._prec_str()})"
        return " + ".join(parts) + tail

    def _prec_str(self) -> str:
        if self.pres.denom == 1 and not any(self.pres.weights):
            return f"t^{self.prec}"
        return f"pi^{self.prec}"


def lincomb(scalars: Sequence[LaurentSeries], elems: Sequence[TowerElement]) -> TowerElement:
    """sum_k scalars[k] * elems[k] in one kernel call."""
    pres = elems[0].pres
    field = pres.field
    D = pres.denom
    prec = INF
    live = []
    for s, e in zip(scalars, elems):
        vs = INF if s.is_zero() else D * s.val0
        sp = INF if s.prec == INF else D * s.prec
        ve = e.weighted_valuation()
        prec = min(prec, padd(vs, e.prec), padd(ve, sp), padd(sp, e.prec))
        if vs != INF and ve != INF:
            live.append((s, e))
    if not live:
        return pres.zero(prec)
    s_lo = min(s.val0 for s, _ in live)
    e_lo = min(e.val0 for _, e in live)
    base = s_lo + e_lo
    ns = max(s.val0 - s_lo + s.coeffs.shape[1] for s, _ in live)
    ne = max(e.val0 - e_lo + e.data.shape[-1] for _, e in live)
    nfull = ns + ne - 1
    nout = nfull if prec == INF else min(nfull, pres.t_precision(prec, int(pres.W.max())) - base)
    if nout <= 0:
        return pres.zero(prec)
    A = np.zeros((len(live), pres.f, ns), dtype=np.int64)
    B = np.zeros((len(live) * pres.M, pres.f, ne), dtype=np.int64)
    ia, ib, io = [], [], []
    for k, (s, e) in enumerate(live):
        a0 = s.val0 - s_lo
        A[k, :, a0:a0 + s.coeffs.shape[1]] = s.coeffs
        e0 = e.val0 - e_lo
        B[k * pres.M:(k + 1) * pres.M, :, e0:e0 + e.data.shape[-1]] = e.flat()
        rows = np.flatnonzero(e.flat().any(axis=(1, 2)))
        ia.extend([k] * len(rows))
        ib.extend((k * pres.M + rows).tolist())
        io.extend(rows.tolist())
    out = kernels.conv_pairs(A, B, np.array(ia, dtype=np.int64), np.array(ib, dtype=np.int64),
                             np.array(io, dtype=np.int64), pres.M, nout, pres.p, field.modulus)
    return TowerElement(pres, base, out.reshape(pres.shape + (pres.f, nout)), prec)


def product(elems: Sequence[TowerElement]) -> TowerElement:
    """Balanced product tree."""
    elems = list(elems)
    if not elems:
        raise ValueError("empty product")
    while len(elems) > 1:
        nxt = [elems[i] * elems[i + 1] for i in range(0, len(elems) - 1, 2)]
        if len(elems) % 2:
            nxt.append(elems[-1])
        elems = nxt
    return elems[0]


def apply_shifts(e: TowerElement, g: Sequence[int]) -> TowerElement:
    """The Galois element sigma_0^g_0 ... sigma_n^g_n applied to e."""
    if not any(a % e.pres.p for a in g):
        return e
    for j, d in enumerate(e.pres.shift_vector(g)):
        if not (d.is_zero() and d.is_exact()):
            e = e.substitute(j, d)
    return e


def norm_levels(e: TowerElement, rel: int | None = None, top: int | None = None) -> TowerElement:
    """Norm down the tower one Artin-Schreier step at a time.

    N_{K_j/K_{j-1}}(z) is the product of the p conjugates of z under
    sigma_j, which moves y_j to y_j + k and fixes the lower generators.
    With ``rel`` set, every factor is cut to ``rel`` coefficients past its
    t-valuation before multiplying (rigorous, only loses precision).
    """
    pres = e.pres
    p = pres.p
    z = e
    top = pres.n if top is None else top
    for j in range(top, -1, -1):
        if rel is not None:
            z = z.truncate_relative(rel)
        conj = [z.substitute(j, LaurentSeries.monomial(pres.field, k, 0)) if k else z for k in range(p)]
        z = product(conj)
        if not z.in_subfield(j):
            raise PrecisionLoss(f"norm to K_{j - 1} has certified y_{j}-dependence (inconsistent presentation)")
        # drop the (zero to precision) y_j-dependent part
        mask = (slice(None),) * j + (slice(1, None),)
        data = z.data.copy()
        data[mask] = 0
        z = TowerElement(pres, z.val0, data, z.prec)
    return z


def norm_tree(e: TowerElement) -> TowerElement:
    """Product of all p^(n+1) Galois conjugates, as one balanced tree."""
    pres = e.pres
    return product([apply_shifts(e, g) for g in group_elements(pres.p, pres.n)])


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------

class Tower:
    """Validated tower L = K(x_0, ..., x_n) built from a spec."""

    def __init__(self, spec: TowerSpec, validate: bool = True):
        if validate:
            validate_spec(spec)
        self.spec = spec
        self.field = spec.field
        self.p = spec.p
        self.n = spec.n
        self.precision = spec.precision
        self.degree = self.p ** (self.n + 1)
        raw = Presentation(self.field, self.n, "x")
        rel = [TowerElement.from_coefficients(raw, {(0,) * (self.n + 1): spec.rhs(i)}) for i in range(self.n + 1)]
        one, zero = LaurentSeries.one(self.field), LaurentSeries.zero(self.field)
        shifts = [[one if i == j else zero for j in range(self.n + 1)] for i in range(self.n + 1)]
        raw.set_relations(rel, shifts)
        self.raw = raw
        self._adapted = None
        self._x_images = None

    def __repr__(self) -> str:
        return f"Tower(p={self.p}, f={self.field.f}, n={self.n}, b={self.spec.b})"

    # -- raw elements ---------------------------------------------------------
    def x(self, i: int) -> TowerElement:
        return self.raw.gen(i)

    def element(self, coeffs: dict) -> TowerElement:
        return TowerElement.from_coefficients(self.raw, coeffs)

    def constant(self, c) -> TowerElement:
        return self.raw.constant(c)

    def group(self) -> list[tuple[int, ...]]:
        return group_elements(self.p, self.n)

    # -- adapted presentation -----------------------------------------------
    @property
    def adapted(self) -> "AdaptedFrame":
        if self._adapted is None:
            from .scaffold import AdaptedFrame
            self._adapted = AdaptedFrame(self)
        return self._adapted

    def to_adapted(self, e: TowerElement) -> TowerElement:
        if e.pres is not self.raw:
            return e
        return self.adapted.from_raw(e)

    def to_raw(self, e: TowerElement) -> TowerElement:
        if e.pres is self.raw:
            return e
        return self.adapted.to_raw(e)

    # -- Galois action, norm, valuation -------------------------------------
    def apply_group_element(self, g: Sequence[int], e: TowerElement) -> TowerElement:
        return apply_shifts(e, g)

    def norm(self, e: TowerElement, method: str = "levels", rel: int | None = None) -> LaurentSeries:
        """N_{L/K}(e) as a series; raises PrecisionLoss if not certifiably in K."""
        if method == "levels":
            z = norm_levels(e, rel)
        elif method == "tree":
            z = norm_tree(e)
        else:
            raise ValueError(f"unknown norm method {method!r}")
        if not z.is_in_base():
            raise PrecisionLoss("norm has non-constant monomials that are not certifiably zero",
                                2 * self.precision)
        return z.constant_coefficient()

    def valuation(self, e: TowerElement, frame: str = "adapted") -> int:
        """v_L(e) = v_K(N_{L/K}(e)) (L/K is fully ramified)."""
        if e.is_zero():
            raise NonzeroUndetectable(f"element is zero to precision O({e._prec_str()}); "
                                      f"retry with --precision {2 * self.precision}")
        z = self.to_adapted(e) if frame == "adapted" else self.to_raw(e)
        if z.is_zero():
            raise NonzeroUndetectable("element is zero to working precision after change of frame; "
                                      f"retry with --precision {2 * self.precision}")
        have = padd(z.prec, -z.weighted_valuation()) if z.prec != INF else INF
        rel = 16 * z.pres.denom
        while True:
            use = None if rel >= have else rel
            N = self.norm(z, rel=use)
            if not N.is_zero():
                return N.valuation()
            if use is None:
                raise NonzeroUndetectable(
                    f"norm is zero to precision O(t^{N.prec}); retry with --precision {2 * self.precision}")
            rel *= 2

    # -- distinguished elements ---------------------------------------------
    def uniformizer(self, b_top: int | None = None) -> TowerElement:
        """t^a * (X_n^(n))^c with a*p^(n+1) - c*b_(n) = 1, in the adapted frame."""
        from .ramification import breaks_from_spec
        if b_top is None:
            b_top = breaks_from_spec(self.spec).b_m
        a, c = bezout_pair(self.degree, b_top)
        X = self.adapted.pres.gen(self.n)
        return (X ** c).shift(a)

    def random_unit(self, rng: random.Random, terms: int | None = None) -> TowerElement:
        """A random unit of the valuation ring: nonzero constant plus positive-valuation terms."""
        frame = self.adapted
        pres = frame.pres
        field = self.field
        weights = frame.predicted_weights()
        coeffs = {}
        c0 = field.random_element(rng, nonzero=True)
        coeffs[(0,) * (self.n + 1)] = LaurentSeries.monomial(field, c0, 0)
        for mono in pres.monomials():
            # v_L(t^k * y^mono) > 0 needs k > sum(mono * weights) / degree
            need = sum(m * w for m, w in zip(mono, weights))
            k0 = need // self.degree + 1
            span = terms if terms is not None else 3
            vals = {k0 + d: field.random_element(rng) for d in range(span)}
            s = LaurentSeries.from_dict(field, vals)
            coeffs[mono] = coeffs[mono] + s if mono in coeffs else s
        return TowerElement.from_coefficients(pres, coeffs)

    def random_element_of_valuation(self, v: int, seed=0, unit: bool = True, check: bool = True) -> TowerElement:
        """t^a * prod X_j^e_j * (random unit) with v_L = v, checked by the norm oracle.

        The monomial part uses the unique digits e_j < p for which the
        predicted valuations of the X_j^(j) reach v modulo p^(n+1).
        """
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        frame = self.adapted
        pres = frame.pres
        weights = frame.predicted_weights()  # -v_L(X_j)
        target = None
        for mono in pres.monomials():
            s = -sum(m * w for m, w in zip(mono, weights))
            if (v - s) % self.degree == 0:
                target = (mono, (v - s) // self.degree)
                break
        if target is None:
            raise ValueError(f"no monomial reaches valuation {v} mod {self.degree}")
        mono, a = target
        e = TowerElement.from_coefficients(pres, {mono: LaurentSeries.monomial(self.field, 1, a)})
        if unit:
            e = e * self.random_unit(rng)
        if check:
            got = self.valuation(e)
            if got != v:
                raise AssertionError(f"random element has oracle valuation {got}, wanted {v}")
        return e


def bezout_pair(degree: int, b: int) -> tuple[int, int]:
    """Minimal non-negative (a, c) with a*degree - c*b = 1."""
    if gcd(degree, b) != 1:
        raise ValueError(f"gcd({degree}, {b}) != 1")
    c = (-pow(b, -1, degree)) % degree
    a = (1 + c * b) // degree
    return a, c


# -- names used across the package and by the CLI ----------------------------

def build_tower(spec: TowerSpec) -> Tower:
    return Tower(spec)


def apply_group_element(g: Sequence[int], e: TowerElement) -> TowerElement:
    return apply_shifts(e, g)


def norm(tower: Tower, e: TowerElement, method: str = "levels") -> LaurentSeries:
    return tower.norm(e, method=method)


def valuation_L(tower: Tower, e: TowerElement) -> int:
    return tower.valuation(e)


def uniformizer(tower: Tower) -> TowerElement:
    return tower.uniformizer()


def random_element_of_valuation(tower: Tower, v: int, rng_seed=0) -> TowerElement:
    return tower.random_element_of_valuation(v, rng_seed)
