"""One-call end-to-end check of a spec.

``full_check`` strings together everything that can be asserted about a
single tower: validation and the error-term bound, the scaffold pipeline
with all of its intermediate assertions, breaks measured from the
ramification groups, the Herbrand round trip, the valuation rows for a
number of random elements, and the normal-basis checks.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field as dc_field

from .ramification import (BreakData, DirectBreaks, breaks_direct, breaks_from_spec, check_congruences,
                           check_error_bound, herbrand_lower_to_upper, herbrand_upper_to_lower)
from .scaffold import ScaffoldBasis, build_scaffold, canonical_rho, normal_basis_check, verify_theorem
from .tower import Tower, TowerSpec, validate_spec

logger = logging.getLogger(__name__)


@dataclass
class TrialResult:
    v_rho: int
    rows_passed: bool
    residues_complete: bool
    normal_basis: bool | None     # checked when v_L(rho) = b_m


@dataclass
class PipelineResult:
    spec: TowerSpec
    breaks: BreakData
    basis: ScaffoldBasis
    direct: DirectBreaks
    direct_matches: bool
    herbrand_ok: bool
    trials: list[TrialResult] = dc_field(default_factory=list)
    canonical_normal: bool = False
    one_normal: bool = True
    seconds: float = 0.0

    @property
    def theorem_ok(self) -> bool:
        return all(t.rows_passed for t in self.trials)

    @property
    def residues_ok(self) -> bool:
        return all(t.residues_complete for t in self.trials)

    @property
    def normal_basis_ok(self) -> bool:
        checked = [t.normal_basis for t in self.trials if t.normal_basis is not None]
        return all(checked) and self.canonical_normal and not self.one_normal

    @property
    def passed(self) -> bool:
        return (self.direct_matches and self.herbrand_ok and self.theorem_ok and self.residues_ok
                and self.normal_basis_ok)


def herbrand_check(data: BreakData) -> bool:
    """Lower -> upper -> lower on the distinct breaks, compared with the u_(i) formula."""
    distinct = data.distinct_lower()
    lower = [v for v, _ in distinct]
    orders = [o for _, o in distinct]
    upper = herbrand_lower_to_upper(lower, orders)
    return upper == data.distinct_upper() and herbrand_upper_to_lower(upper, orders) == lower


def full_check(spec: TowerSpec, trials: int = 10, seed=0, exhaustive: bool = True,
               at_b_m: int = 2) -> PipelineResult:
    """Run every check on ``spec``; scaffold-level violations raise.

    The first ``at_b_m`` random elements have v_L = b_m exactly (these also
    get the normal-basis check); the others are shifted by random multiples
    of p^(n+1).
    """
    start = time.perf_counter()
    validate_spec(spec)
    check_error_bound(spec)
    data = breaks_from_spec(spec)
    check_congruences(data)
    tower = Tower(spec)
    basis = build_scaffold(tower, check=True, oracle=True)
    direct = breaks_direct(tower, exhaustive=exhaustive)
    want = [v for v, _ in data.distinct_lower()]
    result = PipelineResult(spec, data, basis, direct, direct.values == want, herbrand_check(data))
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    D = tower.degree
    for k in range(trials):
        v = data.b_m + (0 if k < at_b_m else D * rng.randrange(-2, 3))
        rho = tower.random_element_of_valuation(v, rng)
        rep = verify_theorem(tower, basis, rho)
        nb = normal_basis_check(tower, rho) if rep.v_rho == data.b_m else None
        result.trials.append(TrialResult(rep.v_rho, rep.passed and all(r.passed for r in rep.rows),
                                         rep.residues_complete, nb))
    canon = canonical_rho(tower, basis)
    result.canonical_normal = tower.valuation(canon) == data.b_m and normal_basis_check(tower, canon)
    result.one_normal = normal_basis_check(tower, tower.adapted.pres.one())
    result.seconds = time.perf_counter() - start
    logger.info("checked p=%d n=%d breaks %s in %.2fs: %s", spec.p, spec.n, data.lower, result.seconds,
                "pass" if result.passed else "FAIL")
    return result
