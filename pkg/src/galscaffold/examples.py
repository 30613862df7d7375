"""Executable constructions: the cyclic degree-p prototype, the binomial
identity for truncated exponentiation, and generators of (near)
one-dimensional tower specs (biquadratic reduction, unit-root extensions,
weakly ramified towers), plus a random spec generator used by the tests.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .errors import IdentityFailed, InvalidInput, InvalidSpec, ScaffoldError
from .fq import GF, FqElement, rank_mod_p
from .group_algebra import binom_scalar
from .ramification import BreakData, breaks_from_spec, check_error_bound, error_bound_rhs
from .series import INF, DEFAULT_PRECISION, LaurentSeries
from .tower import Tower, TowerElement, TowerSpec, apply_shifts, validate_spec

logger = logging.getLogger(__name__)


def _t(field: GF, k: int, c=1) -> LaurentSeries:
    return LaurentSeries.monomial(field, c, k)


def _random_poly(field: GF, rng: random.Random, lo: int, hi: int, lead=None) -> LaurentSeries:
    """Random Laurent polynomial with support in [lo, hi]; nonzero at lo if ``lead``."""
    terms = {k: field.random_element(rng) for k in range(lo, hi + 1)}
    if lead is not None:
        terms[lo] = field(lead)
    return LaurentSeries.from_dict(field, terms)


def _nonzero(field: GF, rng: random.Random) -> FqElement:
    return field.random_element(rng, nonzero=True)


# ---------------------------------------------------------------------------
# cyclic prototype (n = 0)
# ---------------------------------------------------------------------------

@dataclass
class PrototypeReport:
    p: int
    b: int
    v_x: int
    v_binom: int
    rows: list[list[int]]          # per trial: v_L((sigma-1)^i rho), i = 0..p-1
    residues_complete: bool

    @property
    def passed(self) -> bool:
        return self.v_x == -self.b and self.v_binom == -(self.p - 1) * self.b and self.residues_complete


def cyclic_tower(p: int, f: int, beta: LaurentSeries, precision: int = DEFAULT_PRECISION) -> Tower:
    field = GF(p, f)
    spec = TowerSpec(p, f, 0, beta, [LaurentSeries.one(field)], [LaurentSeries.zero(field)], precision)
    return Tower(spec)


def cyclic_prototype(p: int, f: int, beta: LaurentSeries, trials: int = 5, seed=0,
                     precision: int = DEFAULT_PRECISION) -> tuple[Tower, PrototypeReport]:
    """Degree-p tower x^p - x = beta: v_L((sigma-1)^i rho) = (i+1) b mod p."""
    tower = cyclic_tower(p, f, beta, precision)
    rng = random.Random(seed)
    b = tower.spec.b
    x = tower.x(0)
    v_x = tower.valuation(x)
    bx = binom_scalar(x - 1, p - 1, p)
    v_binom = tower.valuation(bx)
    rows = []
    complete = True
    for _ in range(trials):
        v = b + p * rng.randrange(-2, 3)
        rho = tower.to_raw(tower.random_element_of_valuation(v, rng))
        vals = []
        e = rho
        for i in range(p):
            vals.append(tower.valuation(e))
            e = apply_shifts(e, (1,)) - e
        rows.append(vals)
        if sorted(v % p for v in vals) != list(range(p)):
            complete = False
        if any((vals[i] - (i + 1) * b) % p for i in range(p)):
            complete = False
    return tower, PrototypeReport(p, b, v_x, v_binom, rows, complete)


def random_cyclic_element(tower: Tower, rng: random.Random, span: int = 3) -> TowerElement:
    """Random exact element sum_k a_k x^k with Laurent-polynomial a_k."""
    field = tower.field
    coeffs = {}
    for k in range(tower.p):
        lo = rng.randrange(-span, span + 1)
        coeffs[(k,)] = _random_poly(field, rng, lo, lo + span)
    return tower.element(coeffs)


def lemma21_check(p: int, f: int, beta: LaurentSeries, A_list: Sequence[TowerElement] | None = None,
                  trials: int = 20, seed=0) -> bool:
    """sum_i binom(A, i) (sigma - 1)^i binom(x-1, p-1) == binom(x-1+A, p-1) for A in L."""
    tower = cyclic_tower(p, f, beta)
    rng = random.Random(seed)
    x = tower.x(0)
    base = binom_scalar(x - 1, p - 1, p)
    diffs = [base]
    for _ in range(1, p):
        prev = diffs[-1]
        diffs.append(apply_shifts(prev, (1,)) - prev)
    if A_list is None:
        A_list = [random_cyclic_element(tower, rng) for _ in range(trials)]
    for A in A_list:
        if A.pres is not tower.raw:
            A = TowerElement.from_coefficients(tower.raw, A.coefficients(), A.prec)
        lhs = tower.raw.zero()
        for i in range(p):
            lhs = lhs + binom_scalar(A, i, p) * diffs[i]
        rhs = binom_scalar(x - 1 + A, p - 1, p)
        if not (lhs - rhs).is_zero():
            raise IdentityFailed(f"binomial identity fails for A = {A!r}")
    return True


# ---------------------------------------------------------------------------
# biquadratic reduction (p = 2)
# ---------------------------------------------------------------------------

@dataclass
class ReductionTrace:
    steps: list[tuple[LaurentSeries, LaurentSeries]] = dc_field(default_factory=list)  # (mu_k, tau_k)
    adjustments: list[LaurentSeries] = dc_field(default_factory=list)                 # subtracted wp-values
    mu: LaurentSeries | None = None
    tau: LaurentSeries | None = None
    beta: LaurentSeries | None = None        # the representative of beta + K^wp actually used

    def tau_valuations(self) -> list:
        return [INF if tau.is_zero() else tau.valuation() for _, tau in self.steps]


def _sqrt_fq(c: FqElement) -> FqElement:
    """Square root in F_{2^f}: inverse Frobenius."""
    return c.frobenius(-1)


def biquadratic_reduce(beta: LaurentSeries, beta1: LaurentSeries, precision: int = DEFAULT_PRECISION,
                       max_steps: int | None = None) -> tuple[TowerSpec, ReductionTrace]:
    """Write beta1 = Omega_1^2 beta' + epsilon_1 with beta' in beta + K^wp."""
    field = beta.field
    if field.p != 2:
        raise InvalidInput("biquadratic reduction needs p = 2")
    if beta.is_zero() or beta1.is_zero():
        raise InvalidInput("beta and beta1 must be nonzero")
    vb, vb1 = beta.valuation(), beta1.valuation()
    if vb >= 0 or vb % 2 == 0 or vb1 % 2 == 0:
        raise InvalidInput(f"valuations ({vb}, {vb1}) must be negative and odd")
    if vb1 > vb:
        raise InvalidInput(f"need v_K(beta1) = {vb1} <= v_K(beta) = {vb}")
    max_steps = max_steps or (precision + 2 * abs(vb1))
    trace = ReductionTrace()
    cur = beta
    mu = LaurentSeries.zero(field)
    lc1 = beta1.leading_coefficient()
    for _ in range(max_steps):
        tau = cur - mu * mu * beta1
        if tau.is_zero():
            break
        v = tau.valuation()
        if v >= 0:
            # positive-valuation terms, and constants of trace zero, lie in wp(K)
            c = tau.coefficient(0)
            adjust = tau if (not c or field.trace(c) == 0) else tau - _t(field, 0, c)
            if not adjust.is_zero():
                cur = cur - adjust
                trace.adjustments.append(adjust)
            tau = cur - mu * mu * beta1
            break
        if v % 2 == 0:
            d = _sqrt_fq(tau.leading_coefficient())
            w = _t(field, v // 2, d).wp()
            cur = cur - w
            trace.adjustments.append(w)
            continue
        shift = v - vb1
        mu_k = _t(field, shift // 2, _sqrt_fq(tau.leading_coefficient() / lc1))
        mu = mu + mu_k
        new_tau = cur - mu * mu * beta1
        trace.steps.append((mu_k, new_tau))
    else:
        raise InvalidInput(f"reduction did not terminate within {max_steps} steps")
    trace.mu, trace.tau, trace.beta = mu, tau, cur
    vals = trace.tau_valuations()
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise AssertionError(f"tau valuations not increasing: {vals}")
    inv_mu = mu.invert(precision)
    eps1 = -(tau * inv_mu * inv_mu) if not tau.is_zero() else LaurentSeries.zero(field)
    spec = TowerSpec(2, field.f, 1, cur, [LaurentSeries.one(field), inv_mu],
                     [LaurentSeries.zero(field), eps1], precision)
    try:
        validate_spec(spec)
    except InvalidSpec as exc:
        raise InvalidInput(f"not a fully ramified biquadratic extension: {exc}") from exc
    check_error_bound(spec)
    # the spec reproduces wp(x_1) = beta1 to precision
    if not (spec.rhs(1) - beta1).is_zero():
        raise AssertionError("reduced spec does not reproduce beta1")
    return spec, trace


# ---------------------------------------------------------------------------
# unit-root and weakly ramified towers
# ---------------------------------------------------------------------------

def unit_root_extension(p: int, f_big: int, f_sub: int, beta: LaurentSeries | None = None,
                        precision: int = DEFAULT_PRECISION) -> TowerSpec:
    """y^q - y = beta with q = p^f_sub, split into the generators x_i = sum_r phi^r(omega_i y)."""
    if f_sub < 1 or f_big % f_sub:
        raise InvalidInput(f"F_(p^{f_sub}) is not a subfield of F_(p^{f_big})")
    field = GF(p, f_big)
    beta = beta if beta is not None else _t(field, -1)
    if beta.field is not field:
        raise InvalidInput("beta must be defined over the big residue field")
    b = -beta.valuation()
    if b <= 0 or math.gcd(b, p) != 1:
        raise InvalidInput(f"v_K(beta) = {-b} must be negative and prime to p")
    n = f_sub - 1
    zeta = field.subfield_generator(f_sub)
    omegas_fq = [zeta ** i for i in range(f_sub)]
    omegas = [LaurentSeries.monomial(field, w.frobenius(-n), 0) for w in omegas_fq]
    zero = LaurentSeries.zero(field)
    spec = TowerSpec(p, f_big, n, beta, omegas, [zero] * (n + 1), precision)
    try:
        validate_spec(spec)
    except InvalidSpec as exc:
        raise InvalidInput(str(exc)) from exc
    for i, w in enumerate(omegas_fq):
        if not (spec.rhs(i) - beta.scale(w)).is_zero():
            raise AssertionError(f"wp(x_{i}) != omega_{i} beta")
    check_unit_root_generator(spec, omegas_fq, f_sub)
    return spec


def check_unit_root_generator(spec: TowerSpec, omegas: Sequence[FqElement], f_sub: int) -> None:
    """The element y = sum_i c_i x_i (dual basis) satisfies y^q - y = beta.

    Powers are tracked on affine forms c_0 x_0 + ... + c_n x_n + d with
    constant c_i: x_i^p = x_i + omega_i beta keeps the shape.
    """
    field = spec.field
    p, n = spec.p, spec.n
    # Moore matrix A[i][r] = omega_i^(p^r); y^(p^r) = sum_i (A^-1)[r][i] x_i
    A = [[w.frobenius(r) for r in range(f_sub)] for w in omegas]
    inv = _invert_fq_matrix(A)
    coeffs = [inv[0][i] for i in range(n + 1)]
    const = LaurentSeries.zero(field)
    y_coeffs, y_const = list(coeffs), const
    for _ in range(f_sub):
        new_const = y_const.phi(1)
        for i in range(n + 1):
            new_const = new_const + spec.rhs(i).scale(y_coeffs[i].frobenius(1))
        y_coeffs = [c.frobenius(1) for c in y_coeffs]
        y_const = new_const
    if any(a != b for a, b in zip(y_coeffs, coeffs)) or not (y_const - spec.beta).is_zero():
        raise AssertionError("y^q - y != beta for the dual-basis element")


def _invert_fq_matrix(A: list[list[FqElement]]) -> list[list[FqElement]]:
    size = len(A)
    field = A[0][0].field
    M = [list(row) + [field(1 if i == j else 0) for j in range(size)] for i, row in enumerate(A)]
    for col in range(size):
        piv = next((r for r in range(col, size) if M[r][col]), None)
        if piv is None:
            raise InvalidInput("singular Moore matrix: omegas are dependent")
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(size):
            if r != col and M[r][col]:
                fac = M[r][col]
                M[r] = [a - fac * b for a, b in zip(M[r], M[col])]
    return [row[size:] for row in M]


def weakly_ramified_spec(p: int, f: int, n: int, units: Sequence | None = None,
                         epsilons: Sequence[LaurentSeries] | None = None, beta: LaurentSeries | None = None,
                         precision: int = DEFAULT_PRECISION) -> TowerSpec:
    """b = 1 and all m_i = 0: Omega_i = phi^(-n)(omega_i) for F_p-independent units omega_i."""
    field = GF(p, f)
    if units is None:
        if n + 1 > f:
            raise InvalidInput(f"need {n + 1} F_p-independent units but F_q has dimension {f}")
        units = [field.gen ** i for i in range(n + 1)]
    units = [u if isinstance(u, FqElement) else field(u) for u in units]
    if len(units) != n + 1:
        raise InvalidInput(f"need {n + 1} units")
    if any(not u for u in units):
        raise InvalidInput("units must be nonzero")
    if units[0] != field(1):
        raise InvalidInput("the first unit must be 1")
    if rank_mod_p([u.coords for u in units], p) < n + 1:
        raise InvalidInput("units are F_p-dependent")
    beta = beta if beta is not None else _t(field, -1)
    if beta.valuation() != -1:
        raise InvalidInput("weakly ramified towers need v_K(beta) = -1")
    zero = LaurentSeries.zero(field)
    epsilons = list(epsilons) if epsilons is not None else [zero] * (n + 1)
    if len(epsilons) != n + 1 or not epsilons[0].is_zero():
        raise InvalidInput("need n+1 error terms with epsilon_0 = 0")
    for i, e in enumerate(epsilons):
        if not e.is_zero() and e.valuation() < 0:
            raise InvalidInput(f"epsilon_{i} must have non-negative valuation")
    omegas = [LaurentSeries.monomial(field, u.frobenius(-n), 0) for u in units]
    spec = TowerSpec(p, f, n, beta, omegas, epsilons, precision)
    try:
        validate_spec(spec)
    except InvalidSpec as exc:
        raise InvalidInput(str(exc)) from exc
    check_error_bound(spec)
    return spec


# ---------------------------------------------------------------------------
# random specs for sweeps
# ---------------------------------------------------------------------------

def recommended_precision(breaks: BreakData, base: int = 32) -> int:
    """A working precision with margin for the oracle on scaffold rows.

    Measured minimal precisions for random towers with p in {2, 3} and
    n <= 2 stay below half the sum of the lower breaks; ``base`` is margin.
    """
    return base + sum(breaks.lower) // 2


def random_spec(p: int, n: int, rng: random.Random, f: int = 1, b_max: int = 7, m_max: int = 2,
                eps_mode: str = "mixed", extra_terms: int = 2, precision: int | None = None) -> TowerSpec:
    """A random valid spec; error terms at (``at``), inside (``inside``) or without (``zero``) the bound."""
    field = GF(p, f)
    bs = [b for b in range(1, b_max + 1) if math.gcd(b, p) == 1]
    b = rng.choice(bs)
    m_lo = 0 if f > n else 1
    while True:
        m = [rng.randint(m_lo, m_max) for _ in range(n)]
        vals = [0]
        for mi in m:
            vals.append(vals[-1] - mi)
        # leading coefficients of equal-valuation runs must be independent
        leads = [field(1)]
        ok = True
        for i in range(1, n + 1):
            run = [j for j in range(i) if vals[j] == vals[i]]
            for _ in range(20):
                c = _nonzero(field, rng)
                if rank_mod_p([leads[j].coords for j in run] + [c.coords], p) == len(run) + 1:
                    break
            else:
                ok = False
            leads.append(c)
        if ok:
            break
    beta = _random_poly(field, rng, -b, -b + extra_terms, lead=_nonzero(field, rng))
    omegas = [LaurentSeries.one(field)]
    for i in range(1, n + 1):
        omegas.append(_random_poly(field, rng, vals[i], vals[i] + extra_terms, lead=leads[i]))
    zero = LaurentSeries.zero(field)
    spec = TowerSpec(p, f, n, beta, omegas, [zero] * (n + 1), DEFAULT_PRECISION)
    breaks = breaks_from_spec(spec)
    eps = [zero]
    for i in range(1, n + 1):
        mode = eps_mode if eps_mode != "mixed" else rng.choice(["at", "inside", "zero"])
        rhs = error_bound_rhs(breaks, i)
        v_min = math.floor(rhs) + 1
        if mode == "zero":
            eps.append(zero)
            continue
        v = v_min if mode == "at" else v_min + rng.randint(1, 3)
        eps.append(_random_poly(field, rng, v, v + extra_terms, lead=_nonzero(field, rng)))
    spec.epsilons = eps
    spec.precision = precision if precision is not None else recommended_precision(breaks)
    validate_spec(spec)
    check_error_bound(spec, breaks)
    return spec
