"""Shared fixtures and the acceptance summary.

Tests marked ``@pytest.mark.criterion(k)`` count towards acceptance
criterion ``k``; a single PASS/FAIL line per criterion is printed at the
end of the session.
"""

from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from galscaffold.fq import GF
from galscaffold.series import LaurentSeries
from galscaffold.tower import TowerSpec

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = {
    1: "reference tower end to end",
    2: "random tower sweep: scaffold assertions and valuation rows",
    3: "direct breaks, Herbrand conversion, congruences",
    4: "cyclic prototype and the binomial identity",
    5: "example generators through the full pipeline",
    6: "diagnostics and normal-basis checks",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): counts towards acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(marker.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        results = _outcomes.get(k)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {status:7s} {CRITERIA[k]} "
                                    f"({sum(results or [])}/{len(results or [])} tests)")


def t_series(field: GF, terms: dict, prec=None) -> LaurentSeries:
    from galscaffold.series import INF
    return LaurentSeries.from_dict(field, terms, INF if prec is None else prec)


@pytest.fixture(scope="session")
def ref1_spec() -> TowerSpec:
    """p=2, n=1, beta = t^-1, Omega = (1, t^-1), no error terms."""
    F = GF(2, 1)
    one = LaurentSeries.one(F)
    tinv = LaurentSeries.monomial(F, 1, -1)
    zero = LaurentSeries.zero(F)
    return TowerSpec(2, 1, 1, tinv, [one, tinv], [zero, zero], 64)


@pytest.fixture(scope="session")
def ref1_tower(ref1_spec):
    from galscaffold.tower import Tower
    return Tower(ref1_spec)


@pytest.fixture(scope="session")
def ref1_basis(ref1_tower):
    from galscaffold.scaffold import build_scaffold
    return build_scaffold(ref1_tower)
