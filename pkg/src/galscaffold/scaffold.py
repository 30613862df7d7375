"""Galois scaffolding for near one-dimensional elementary abelian towers.

Pipeline: Omega-triangle -> [Omega^phi] and its inverse [Delta] ->
recursively defined elements X_j^(i) together with B_i and E_j^(i) ->
Theta_(i) in K[G] and normalizers alpha_j -> comparison of predicted and
measured valuations.  Every measured valuation comes from the norm oracle
of ``tower.Tower.valuation``.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .errors import AssumptionFailed, DivisionByZero, LemmaViolation, Mismatch, PrecisionLoss
from .fq import GF
from .group_algebra import GroupAlgebraElement, apply_algebra, binom_scalar, conjugate_table, truncated_exp
from .ramification import BreakData, breaks_from_spec
from .series import INF, LaurentSeries
from .tower import Presentation, Tower, TowerElement, apply_shifts, group_elements, lincomb

logger = logging.getLogger(__name__)

Matrix = list[list[LaurentSeries]]


# ---------------------------------------------------------------------------
# row reduction of the Omegas
# ---------------------------------------------------------------------------

@dataclass
class OmegaTriangle:
    """Entries Omega_j^(i) for 0 <= i <= j <= n."""

    n: int
    entries: dict[tuple[int, int], LaurentSeries]

    def __getitem__(self, ij: tuple[int, int]) -> LaurentSeries:
        return self.entries[ij]


def omega_reduce(omegas: Sequence[LaurentSeries], rel: int | None = None, check: bool = True) -> OmegaTriangle:
    """Omega_j^(i) = wp(Omega_j^(i-1)) / wp(Omega_i^(i-1))."""
    n = len(omegas) - 1
    field = omegas[0].field
    p = field.p
    entries = {(0, j): omegas[j] for j in range(n + 1)}
    for i in range(1, n + 1):
        denom = entries[(i - 1, i)].wp()
        if denom.is_zero():
            raise DivisionByZero(f"wp(Omega_{i}^({i - 1})) vanishes to precision")
        inv = denom.invert(rel)
        entries[(i, i)] = LaurentSeries.one(field)
        for j in range(i + 1, n + 1):
            entries[(i, j)] = entries[(i - 1, j)].wp() * inv
    tri = OmegaTriangle(n, entries)
    if check:
        vals = [om.valuation() for om in omegas]
        m = [None] + [vals[k - 1] - vals[k] for k in range(1, n + 1)]
        for i in range(n + 1):
            for j in range(i + 1, n + 1):
                want = -p**i * sum(m[k] for k in range(i + 1, j + 1))
                e = entries[(i, j)]
                got = e.valuation() if not e.is_zero() else INF
                if got != want:
                    raise LemmaViolation("triangle valuation", i, j, f"v_K = {got}, expected {want}")
    return tri


def omega_phi_matrix(tri: OmegaTriangle, n: int | None = None) -> Matrix:
    """[phi^(n-i-1)(Omega_j^(i))], with the unit row at i = n."""
    n = tri.n if n is None else n
    field = tri[(0, 0)].field
    zero, one = LaurentSeries.zero(field), LaurentSeries.one(field)
    W = [[zero] * (n + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            if j < i:
                continue
            if i == n:
                W[i][j] = one
            else:
                W[i][j] = tri[(i, j)].phi(n - i - 1)
    return W


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    field = A[0][0].field
    size = len(A)
    out = []
    for i in range(size):
        row = []
        for j in range(size):
            acc = LaurentSeries.zero(field)
            for k in range(size):
                if not (A[i][k].is_zero() and A[i][k].is_exact()) and not (B[k][j].is_zero() and B[k][j].is_exact()):
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def is_identity(M: Matrix) -> bool:
    return all((M[i][j] - (1 if i == j else 0)).is_zero() for i in range(len(M)) for j in range(len(M)))


def invert_unipotent(M: Matrix) -> Matrix:
    """Back substitution for a unipotent upper-triangular matrix."""
    size = len(M)
    field = M[0][0].field
    for i in range(size):
        if not (M[i][i] - 1).is_zero():
            raise ValueError("matrix is not unipotent")
        for j in range(i):
            if not M[i][j].is_zero():
                raise ValueError("matrix is not upper triangular")
    zero, one = LaurentSeries.zero(field), LaurentSeries.one(field)
    inv = [[one if i == j else zero for j in range(size)] for i in range(size)]
    for j in range(size):
        for i in range(j - 1, -1, -1):
            acc = LaurentSeries.zero(field)
            for k in range(i + 1, j + 1):
                acc = acc + M[i][k] * inv[k][j]
            inv[i][j] = -acc
    return inv


@dataclass
class ScaffoldMatrices:
    omega_phi: Matrix
    delta: Matrix


def scaffold_matrices(tower: Tower, tri: OmegaTriangle | None = None) -> ScaffoldMatrices:
    tri = tri or omega_reduce(tower.spec.omegas, rel=tower.precision)
    W = omega_phi_matrix(tri, tower.n)
    D = invert_unipotent(W)
    if not is_identity(mat_mul(W, D)):
        raise PrecisionLoss("[Omega^phi][Delta] is not the identity to working precision", 2 * tower.precision)
    return ScaffoldMatrices(W, D)


def check_delta_valuations(D: Matrix, breaks: BreakData) -> None:
    """v_K(Delta_ij) = (b_(i) - b_(j)) / p^(j+1) for i < j."""
    p = breaks.p
    for i in range(len(D)):
        for j in range(i + 1, len(D)):
            num = breaks.lower[i] - breaks.lower[j]
            if num % p ** (j + 1):
                raise LemmaViolation("Delta valuation", i, j, f"{num} not divisible by {p ** (j + 1)}")
            want = num // p ** (j + 1)
            got = D[i][j].valuation() if not D[i][j].is_zero() else INF
            if got != want:
                raise LemmaViolation("Delta valuation", i, j, f"v_K = {got}, expected {want}")


# ---------------------------------------------------------------------------
# affine forms in the generators x_0..x_n
# ---------------------------------------------------------------------------

class AffineForm:
    """c + sum_k a_k x_k with a_k, c in K (x_k the raw generators)."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: list[LaurentSeries], const: LaurentSeries):
        self.coeffs = coeffs
        self.const = const

    @classmethod
    def generator(cls, field: GF, n: int, k: int) -> "AffineForm":
        zero = LaurentSeries.zero(field)
        return cls([LaurentSeries.one(field) if i == k else zero for i in range(n + 1)], zero)

    def __add__(self, o: "AffineForm") -> "AffineForm":
        return AffineForm([a + b for a, b in zip(self.coeffs, o.coeffs)], self.const + o.const)

    def __neg__(self) -> "AffineForm":
        return AffineForm([-a for a in self.coeffs], -self.const)

    def __sub__(self, o: "AffineForm") -> "AffineForm":
        return self + (-o)

    def scale(self, s: LaurentSeries) -> "AffineForm":
        return AffineForm([a * s for a in self.coeffs], self.const * s)

    def wp(self, rhs: Sequence[LaurentSeries]) -> "AffineForm":
        """wp(a x) = phi(a) wp(x) + wp(a) x, with wp(x_k) = rhs[k]."""
        coeffs = [a.wp() for a in self.coeffs]
        const = self.const.wp()
        for a, r in zip(self.coeffs, rhs):
            const = const + a.phi(1) * r
        return AffineForm(coeffs, const)

    def is_zero(self) -> bool:
        return self.const.is_zero() and all(a.is_zero() for a in self.coeffs)

    def to_element(self, pres: Presentation) -> TowerElement:
        n = pres.n
        coeffs = {(0,) * (n + 1): self.const}
        for k, a in enumerate(self.coeffs):
            coeffs[tuple(1 if i == k else 0 for i in range(n + 1))] = a
        return TowerElement.from_coefficients(pres, coeffs)


@dataclass
class XRecursion:
    X: dict[tuple[int, int], AffineForm]       # X_j^(i), i <= j
    B: list[AffineForm]                         # B_0..B_n
    E: dict[tuple[int, int], LaurentSeries]     # E_j^(i), i <= j
    X_list: list[TowerElement]                  # X_j^(j) in the raw presentation


def x_recursion(tower: Tower, tri: OmegaTriangle | None = None, breaks: BreakData | None = None,
                check: bool = True, oracle: bool = True) -> XRecursion:
    """X_j^(i) = X_j^(i-1) - phi^(n-i)(Omega_j^(i-1)) X_(i-1)^(i-1), with B_i, E_j^(i).

    With ``check`` the identity wp(X_j^(i)) = phi^(n-i)(Omega_j^(i)) B_i + E_j^(i)
    is verified at every step (wp computed directly from the defining
    relations), as well as the bound v_K(E_i^(i-1)) > -b_(i)/p^i; with
    ``oracle`` also v_L(X_j^(j)) = -p^(n-j) b_(j) via the norm oracle.
    """
    spec = tower.spec
    field, p, n = tower.field, tower.p, tower.n
    tri = tri or omega_reduce(spec.omegas, rel=tower.precision)
    breaks = breaks or breaks_from_spec(spec)
    rhs = [spec.rhs(k) for k in range(n + 1)]
    zero = LaurentSeries.zero(field)
    X = {(0, j): AffineForm.generator(field, n, j) for j in range(n + 1)}
    E = {(0, j): spec.epsilons[j] for j in range(n + 1)}
    E[(0, 0)] = zero
    B = [AffineForm([zero] * (n + 1), spec.beta)]
    for i in range(1, n + 1):
        prev = X[(i - 1, i - 1)]
        Bi = prev.scale(-tri[(i - 1, i)].wp().phi(n - i))
        Bi = AffineForm(Bi.coeffs, Bi.const + E[(i - 1, i)])
        B.append(Bi)
        for j in range(i, n + 1):
            X[(i, j)] = X[(i - 1, j)] - prev.scale(tri[(i - 1, j)].phi(n - i))
            if j == i:
                E[(i, j)] = zero
            else:
                E[(i, j)] = E[(i - 1, j)] - tri[(i, j)].phi(n - i) * E[(i - 1, i)]
    if check:
        for i in range(n + 1):
            for j in range(i, n + 1):
                lhs = X[(i, j)].wp(rhs)
                want = B[i].scale(tri[(i, j)].phi(n - i))
                want = AffineForm(want.coeffs, want.const + E[(i, j)])
                if not (lhs - want).is_zero():
                    raise LemmaViolation("wp(X_j^(i)) identity", i, j)
        for i in range(1, n + 1):
            e = E[(i - 1, i)]
            if not e.is_zero():
                if e.valuation() * p**i <= -breaks.lower[i]:
                    raise LemmaViolation("E bound", i, None,
                                         f"v_K(E_{i}^({i - 1})) = {e.valuation()} <= -{breaks.lower[i]}/{p ** i}")
    X_list = [X[(j, j)].to_element(tower.raw) for j in range(n + 1)]
    if oracle:
        for j, Xj in enumerate(X_list):
            got = tower.valuation(Xj)
            want = -p ** (n - j) * breaks.lower[j]
            if got != want:
                raise LemmaViolation("v_L(X_j^(j))", j, None, f"oracle {got}, expected {want}")
    return XRecursion(X, B, E, X_list)


def check_assumption1(tower: Tower, X_list: Sequence[TowerElement], matrices: ScaffoldMatrices) -> Matrix:
    """(sigma_i - 1) X_j^(j) lies in K and equals Delta_ij; returns the measured matrix."""
    n = tower.n
    out = []
    for i in range(n + 1):
        g = tuple(1 if k == i else 0 for k in range(n + 1))
        row = []
        for j in range(n + 1):
            d = apply_shifts(X_list[j], g) - X_list[j]
            if not d.is_in_base():
                raise AssumptionFailed(i, j, f"{d!r} is not in K")
            c = d.constant_coefficient()
            if not (c - matrices.delta[i][j]).is_zero():
                raise AssumptionFailed(i, j, f"{c!r} != Delta_{i}{j} = {matrices.delta[i][j]!r}")
            row.append(c)
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# the adapted presentation used by the valuation oracle
# ---------------------------------------------------------------------------

class AdaptedFrame:
    """Coordinates X_0..X_n with x_j = sum_k [Omega^phi]_kj X_k.

    Relations wp(X_j) are computed directly from the defining relations of
    the x_j (they lie in K + K X_0 + ... + K X_(j-1)), and
    sigma_i X_j = X_j + Delta_ij.  Elements in this frame have the same
    norms as their raw counterparts; only the coordinates differ.
    """

    def __init__(self, tower: Tower):
        self.tower = tower
        field, n = tower.field, tower.n
        self.triangle = omega_reduce(tower.spec.omegas, rel=tower.precision, check=False)
        self.matrices = scaffold_matrices(tower, self.triangle)
        W, D = self.matrices.omega_phi, self.matrices.delta
        rhs = [tower.spec.rhs(k) for k in range(n + 1)]
        pres = Presentation(field, n, "X")
        pres.set_weights(self.predicted_weights(), tower.p ** (n + 1))
        relations = []
        for j in range(n + 1):
            form = AffineForm([D[k][j] for k in range(n + 1)], LaurentSeries.zero(field))
            w = form.wp(rhs)
            coeffs = {(0,) * (n + 1): w.const}
            for l in range(n + 1):
                c = LaurentSeries.zero(field)
                for k in range(n + 1):
                    if not (w.coeffs[k].is_zero() and w.coeffs[k].is_exact()):
                        c = c + w.coeffs[k] * W[l][k]
                if l >= j:
                    if not c.is_zero():
                        raise PrecisionLoss(f"relation for X_{j} involves X_{l}", 2 * tower.precision)
                    continue
                coeffs[tuple(1 if i == l else 0 for i in range(n + 1))] = c
            relations.append(TowerElement.from_coefficients(pres, coeffs))
        pres.set_relations(relations, D)
        self.pres = pres
        self._images_raw_to_X: list[TowerElement] | None = None
        self._images_X_to_raw: list[TowerElement] | None = None

    def predicted_weights(self) -> list[int]:
        """-v_L(X_j) = p^(n-j) b_(j) from the break formulas."""
        br = breaks_from_spec(self.tower.spec)
        p, n = self.tower.p, self.tower.n
        return [p ** (n - j) * br.lower[j] for j in range(n + 1)]

    def _monomial_images(self, target: Presentation, lin: list[TowerElement]) -> list[TowerElement]:
        images = []
        for mono in target.monomials():
            e = target.one()
            for k, a in enumerate(mono):
                for _ in range(a):
                    e = e * lin[k]
            images.append(e)
        return images

    def from_raw(self, e: TowerElement) -> TowerElement:
        if self._images_raw_to_X is None:
            n = self.tower.n
            W = self.matrices.omega_phi
            lin = [lincomb([W[l][k] for l in range(n + 1)], [self.pres.gen(l) for l in range(n + 1)])
                   for k in range(n + 1)]
            self._images_raw_to_X = self._monomial_images(self.pres, lin)
        return self._convert(e, self._images_raw_to_X)

    def to_raw(self, e: TowerElement) -> TowerElement:
        if self._images_X_to_raw is None:
            n = self.tower.n
            D = self.matrices.delta
            raw = self.tower.raw
            lin = [lincomb([D[k][j] for k in range(n + 1)], [raw.gen(k) for k in range(n + 1)])
                   for j in range(n + 1)]
            self._images_X_to_raw = self._monomial_images(raw, lin)
        return self._convert(e, self._images_X_to_raw)

    @staticmethod
    def _convert(e: TowerElement, images: list[TowerElement]) -> TowerElement:
        coeffs = e.coefficients()
        if not coeffs:
            return images[0].pres.zero(e.prec)
        monos = e.pres.monomials()
        index = {m: k for k, m in enumerate(monos)}
        return lincomb(list(coeffs.values()), [images[index[m]] for m in coeffs])


# ---------------------------------------------------------------------------
# Thetas, alphas and the verification
# ---------------------------------------------------------------------------

def build_thetas(delta: Matrix, n: int) -> list[GroupAlgebraElement]:
    """Theta_(0) = sigma_n, Theta_(i) = sigma_(n-i) prod_k Theta_(k)^[-Delta_(n-i, n-k)]."""
    field = delta[0][0].field
    thetas = [GroupAlgebraElement.sigma(field, n, n)]
    for i in range(1, n + 1):
        th = GroupAlgebraElement.sigma(field, n, n - i)
        for k in range(i):
            th = th * truncated_exp(thetas[k], -delta[n - i][n - k])
        thetas.append(th)
    for i, th in enumerate(thetas):
        if not th.is_one_unit():
            raise LemmaViolation("Theta is a 1-unit", i)
    return thetas


def scaffold_alphas(breaks: BreakData, field: GF) -> list[LaurentSeries]:
    """alpha_j = t^v with v = p^(n-j-1) sum_{i>j} p^i m_i (alpha_n = 1)."""
    p, n, m = breaks.p, breaks.n, breaks.m
    out = []
    for j in range(n + 1):
        if j == n:
            v = 0
        else:
            v = p ** (n - j - 1) * sum(p**i * m[i - 1] for i in range(j + 1, n + 1))
            num = breaks.b_m - breaks.lower[j]
            if num % p ** (j + 1) or num // p ** (j + 1) != v:
                raise LemmaViolation("alpha valuation", j, None, f"{v} vs ({breaks.b_m} - {breaks.lower[j]})/{p ** (j + 1)}")
        out.append(LaurentSeries.monomial(field, 1, v))
    return out


def predicted_valuation(a: Sequence[int], v_rho: int, breaks: BreakData) -> int:
    p, n = breaks.p, breaks.n
    if (v_rho - breaks.b_m) % p ** (n + 1):
        raise ValueError(f"v_L(rho) = {v_rho} is not congruent to b_m = {breaks.b_m} mod {p ** (n + 1)}")
    if len(a) != n + 1 or any(not 0 <= x < p for x in a):
        raise ValueError(f"exponent vector {tuple(a)} out of range")
    return v_rho + sum(x * p**s for s, x in enumerate(a)) * breaks.b_m


@dataclass
class ScaffoldBasis:
    tower: Tower
    breaks: BreakData
    triangle: OmegaTriangle
    matrices: ScaffoldMatrices
    recursion: XRecursion
    thetas: list[GroupAlgebraElement]
    alphas: list[LaurentSeries]
    measured_delta: Matrix
    _row_ops: dict | None = dc_field(default=None, repr=False)

    @property
    def X_list(self) -> list[TowerElement]:
        return self.recursion.X_list

    def row_operator(self, a: Sequence[int]) -> GroupAlgebraElement:
        """prod_s alpha_(n-s)^(a_s) (Theta_(s) - 1)^(a_s), products taken s = 0..n."""
        if self._row_ops is None:
            self._row_ops = {}
        a = tuple(a)
        if a not in self._row_ops:
            n = self.tower.n
            field = self.tower.field
            op = GroupAlgebraElement.one(field, n)
            for s, e in enumerate(a):
                if e:
                    step = (self.thetas[s] - 1).scale(self.alphas[n - s])
                    for _ in range(e):
                        op = op * step
            self._row_ops[a] = op
        return self._row_ops[a]


def build_scaffold(tower: Tower, check: bool = True, oracle: bool = True) -> ScaffoldBasis:
    """Run the whole pipeline with all intermediate assertions."""
    breaks = breaks_from_spec(tower.spec)
    tri = omega_reduce(tower.spec.omegas, rel=tower.precision, check=check)
    matrices = tower.adapted.matrices if tower._adapted is not None else scaffold_matrices(tower, tri)
    if check:
        check_delta_valuations(matrices.delta, breaks)
    rec = x_recursion(tower, tri, breaks, check=check, oracle=oracle)
    a1 = check_assumption1(tower, rec.X_list, matrices)
    thetas = build_thetas(matrices.delta, tower.n)
    alphas = scaffold_alphas(breaks, tower.field)
    return ScaffoldBasis(tower, breaks, tri, matrices, rec, thetas, alphas, a1)


@dataclass
class TheoremRow:
    a: tuple[int, ...]
    predicted: int
    measured: int
    source: str = "oracle"

    @property
    def passed(self) -> bool:
        return self.predicted == self.measured


@dataclass
class TheoremReport:
    v_rho: int
    rows: list[TheoremRow]
    residues_complete: bool

    @property
    def passed(self) -> bool:
        return self.residues_complete and all(r.passed for r in self.rows)


def exponent_vectors(p: int, n: int) -> list[tuple[int, ...]]:
    """All a in {0..p-1}^(n+1), ordered by sum_s a_s p^s."""
    return [tuple((k // p**s) % p for s in range(n + 1)) for k in range(p ** (n + 1))]


def verify_theorem(tower: Tower, basis: ScaffoldBasis, rho: TowerElement, strict: bool = False) -> TheoremReport:
    """Compare oracle valuations of the row elements with the predicted values."""
    p, n = tower.p, tower.n
    breaks = basis.breaks
    v_rho = tower.valuation(rho)
    if (v_rho - breaks.b_m) % p ** (n + 1):
        raise ValueError(f"v_L(rho) = {v_rho} is not congruent to b_m = {breaks.b_m} mod {p ** (n + 1)}")
    conj = conjugate_table(rho, tower.group())
    rows = []
    for a in exponent_vectors(p, n):
        want = predicted_valuation(a, v_rho, breaks)
        elem = apply_algebra(basis.row_operator(a), rho, conj)
        got = tower.valuation(elem)
        rows.append(TheoremRow(a, want, got))
        if strict and got != want:
            raise Mismatch(a, want, got)
    residues = {r.measured % p ** (n + 1) for r in rows}
    complete = len(residues) == p ** (n + 1)
    return TheoremReport(v_rho, rows, complete)


def canonical_rho(tower: Tower, basis: ScaffoldBasis) -> TowerElement:
    """A * prod_j binom(X_j, p-1) with A = t^a a monomial making v_L = b_m (adapted frame)."""
    p, n = tower.p, tower.n
    pres = tower.adapted.pres
    weights = tower.adapted.predicted_weights()
    total = basis.breaks.b_m + (p - 1) * sum(weights)
    if total % p ** (n + 1):
        raise LemmaViolation("canonical element valuation", n, None, f"{total} not divisible by {p ** (n + 1)}")
    elem = pres.one()
    for j in range(n + 1):
        elem = elem * binom_scalar(pres.gen(j), p - 1, p)
    return elem.shift(total // p ** (n + 1))


def normal_basis_check(tower: Tower, rho: TowerElement) -> bool:
    """Whether the p^(n+1) conjugates of rho are K-linearly independent.

    Gaussian elimination on the coefficient matrix, pivoting on the entry of
    smallest valuation in each column.
    """
    group = tower.group()
    conj = [apply_shifts(rho, g) for g in group]
    monos = rho.pres.monomials()
    rows = [[c.coefficient(m) for m in monos] for c in conj]
    size = len(rows)
    for col in range(size):
        best, best_v = None, None
        uncertain = False
        for r in range(col, size):
            e = rows[r][col]
            if e.is_zero():
                if not e.is_exact():
                    uncertain = True
                continue
            if best is None or e.valuation() < best_v:
                best, best_v = r, e.valuation()
        if best is None:
            if uncertain:
                raise PrecisionLoss(f"pivot in column {col} cannot be certified", 2 * tower.precision)
            return False
        rows[col], rows[best] = rows[best], rows[col]
        inv = rows[col][col].invert()
        for r in range(col + 1, size):
            e = rows[r][col]
            if e.is_zero() and e.is_exact():
                continue
            factor = e * inv
            rows[r] = [rows[r][k] - factor * rows[col][k] if k > col else LaurentSeries.zero(tower.field)
                       for k in range(size)]
    return True
