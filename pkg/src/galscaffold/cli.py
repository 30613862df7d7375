"""Command line interface.

::

    galscaffold validate --spec tower.txt
    galscaffold breaks   --spec tower.txt [--exhaustive]
    galscaffold scaffold --spec tower.txt
    galscaffold verify   --spec tower.txt --seed 1 --trials 10
    galscaffold example  {cyclic,biquadratic,unitroot,weak} [generator options] [--out PATH] [--check]

Every command accepts ``--spec PATH --precision N --seed N --trials N
--format {table,records}``.  ``records`` prints one JSON object per line
with the key order listed in ``specio.RECORD_FIELDS``; ``table`` prints the
same content for humans.  Exit status: 0 when every check passed, 1 when a
check failed, 2 when the input was rejected or a computation could not be
certified (an ``error`` record with code, module and detail is printed).
Output depends only on (spec, seed, precision, options).
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from typing import Callable, Sequence

from . import kernels
from .errors import InvalidInput, ScaffoldError
from .examples import (biquadratic_reduce, cyclic_prototype, lemma21_check, unit_root_extension,
                       weakly_ramified_spec)
from .fq import GF
from .ramification import (breaks_direct, breaks_from_spec, check_error_bound, herbrand_lower_to_upper,
                           herbrand_upper_to_lower)
from .scaffold import build_scaffold, canonical_rho, normal_basis_check, verify_theorem
from .series import INF, LaurentSeries, format_series
from .pipeline import full_check
from .specio import emit_spec, format_record, load_spec, parse_series, spec_record
from .tower import Tower, TowerSpec, validate_spec

logger = logging.getLogger("galscaffold")

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2


class Report:
    """Ordered records plus the overall verdict of a command."""

    def __init__(self, command: str):
        self.command = command
        self.records: list[dict] = []
        self.passed = True

    def add(self, kind: str, **fields) -> dict:
        rec = {"kind": kind, **fields}
        self.records.append(rec)
        if fields.get("passed") is False:
            self.passed = False
        return rec

    def check(self, name: str, passed: bool, source: str, detail: str = "") -> None:
        self.add("check", name=name, passed=bool(passed), source=source, detail=detail)

    def finish(self, detail: str = "") -> None:
        self.records.append({"kind": "summary", "command": self.command, "passed": self.passed, "detail": detail})


# ---------------------------------------------------------------------------
# shared steps
# ---------------------------------------------------------------------------

def _load(args) -> TowerSpec:
    if not args.spec:
        raise InvalidInput(f"'{args.command}' needs --spec PATH")
    spec = load_spec(args.spec, args.precision)
    validate_spec(spec)
    return spec


def _bound_rows(report: Report, spec: TowerSpec) -> None:
    """Bound rows for every error term; raises BoundViolated after recording them."""
    bound = check_error_bound(spec, strict=False)
    for row in bound.rows:
        report.add("bound", i=row.i, valuation=row.valuation, rhs=row.rhs, passed=row.passed,
                   reducible=row.reducible)
    if not bound.passed:
        check_error_bound(spec, strict=True)


def _matrix_records(report: Report, name: str, M) -> None:
    for i, row in enumerate(M):
        report.add("matrix", name=name, row=i, entries=list(row))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args, report: Report) -> None:
    spec = _load(args)
    report.add(**spec_record(spec))
    report.check("defining conditions", True, "validation",
                 "beta, gcd, Omega_0, ordering, independence, epsilon sizes")
    _bound_rows(report, spec)
    breaks = breaks_from_spec(spec)
    report.check("break congruences", True, "formula", f"lower {breaks.lower}")


def cmd_breaks(args, report: Report) -> None:
    spec = _load(args)
    _bound_rows(report, spec)
    data = breaks_from_spec(spec)
    for i, lower, upper, m in data.rows():
        report.add("break", index=i, lower=lower, upper=upper, m=m, source="formula")
    report.check("congruences b_(i) = b_(n) mod p^(i+1)", True, "formula")
    tower = Tower(spec)
    direct = breaks_direct(tower, exhaustive=args.exhaustive)
    for g, v in direct.evaluated:
        report.add("direct", sigma=list(g), i_sigma=v, source="oracle")
    distinct = data.distinct_lower()
    want = [v for v, _ in distinct]
    report.check("direct breaks match formula", direct.values == want, "oracle",
                 f"direct {direct.values}, formula {want}")
    orders = [o for _, o in distinct]
    upper = herbrand_lower_to_upper(want, orders)
    back = herbrand_upper_to_lower(upper, orders)
    ok = upper == data.distinct_upper() and back == want
    report.add("herbrand", lower=want, orders=orders, upper=upper, round_trip=back, passed=ok)


def cmd_scaffold(args, report: Report) -> None:
    spec = _load(args)
    _bound_rows(report, spec)
    tower = Tower(spec)
    basis = build_scaffold(tower, check=True, oracle=True)
    report.check("triangle valuations", True, "formula")
    report.check("Delta valuations", True, "formula")
    report.check("wp(X_j^(i)) identities and error bounds", True, "formula")
    report.check("v_L(X_j^(j)) = -p^(n-j) b_(j)", True, "oracle")
    report.check("(sigma_i - 1) X_j^(j) = Delta_ij", True, "oracle")
    _matrix_records(report, "Omega^phi", basis.matrices.omega_phi)
    _matrix_records(report, "Delta", basis.matrices.delta)
    for i, th in enumerate(basis.thetas):
        terms = [[list(g), th.coeffs[g]] for g in sorted(th.coeffs)]
        report.add("theta", index=i, terms=terms)
    for j, a in enumerate(basis.alphas):
        report.add("alpha", index=j, value=a, valuation=a.valuation())


def cmd_verify(args, report: Report) -> None:
    spec = _load(args)
    _bound_rows(report, spec)
    tower = Tower(spec)
    basis = build_scaffold(tower, check=True, oracle=True)
    breaks = basis.breaks
    p, n = tower.p, tower.n
    D = p ** (n + 1)
    rng = random.Random(args.seed)
    for trial in range(args.trials):
        v = breaks.b_m + D * rng.randrange(-2, 3)
        rho = tower.random_element_of_valuation(v, rng)
        res = verify_theorem(tower, basis, rho)
        for row in res.rows:
            report.add("row", trial=trial, a=list(row.a), predicted=row.predicted, measured=row.measured,
                       passed=row.passed, source="formula/oracle")
        report.add("trial", trial=trial, v_rho=res.v_rho, rows=len(res.rows), passed=res.passed,
                   residues_complete=res.residues_complete, source="oracle")
    canon = canonical_rho(tower, basis)
    v = tower.valuation(canon)
    report.check("canonical element has v_L = b_m", v == breaks.b_m, "oracle", f"v_L = {v}")
    report.check("conjugates of the canonical element form a basis", normal_basis_check(tower, canon), "oracle")
    report.check("conjugates of 1 do not form a basis", not normal_basis_check(tower, tower.adapted.pres.one()),
                 "oracle")


def tower_rows(spec: TowerSpec) -> int:
    return spec.p ** (spec.n + 1)


def _field_for(args) -> GF:
    return GF(args.p, args.f)


def _series_arg(field: GF, text: str | None, default: str) -> LaurentSeries:
    try:
        return parse_series(field, text if text is not None else default)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None


def cmd_example(args, report: Report) -> None:
    prec = args.precision
    kind = args.kind
    if kind == "cyclic":
        field = _field_for(args)
        beta = _series_arg(field, args.beta, "t^-1")
        tower, proto = cyclic_prototype(args.p, args.f, beta, trials=args.trials, seed=args.seed,
                                        **({"precision": prec} if prec else {}))
        spec = tower.spec
        report.check("v_L(x) = -b", proto.v_x == -proto.b, "oracle", f"v_L(x) = {proto.v_x}")
        report.check("v_L(binom(x-1, p-1)) = -(p-1) b", proto.v_binom == -(args.p - 1) * proto.b, "oracle")
        report.check("residues of v_L((sigma-1)^i rho) complete", proto.residues_complete, "oracle",
                     f"{proto.rows}")
        lemma21_check(args.p, args.f, beta, trials=args.trials, seed=args.seed)
        report.check("truncated exponential binomial identity", True, "exact")
    elif kind == "biquadratic":
        field = GF(2, args.f)
        beta = _series_arg(field, args.beta, "t^-1")
        beta1 = _series_arg(field, args.beta1, "t^-3")
        spec, trace = biquadratic_reduce(beta, beta1, **({"precision": prec} if prec else {}))
        report.check("reduction terminated", True, "exact",
                     f"{len(trace.steps)} steps, tau valuations {trace.tau_valuations()}")
    elif kind == "unitroot":
        f_big = args.f if args.f > 1 else args.f_sub
        field = GF(args.p, f_big)
        beta = _series_arg(field, args.beta, "t^-1")
        spec = unit_root_extension(args.p, f_big, args.f_sub, beta, **({"precision": prec} if prec else {}))
        report.check("y^q - y = beta for the dual-basis element", True, "exact")
    else:
        f = args.f if args.f > 1 else args.n + 1
        field = GF(args.p, f)
        units = [field.parse(u) for u in args.units.split(";")] if args.units else None
        eps = [_series_arg(field, e, "0") for e in args.epsilons.split(";")] if args.epsilons else None
        spec = weakly_ramified_spec(args.p, f, args.n, units, eps, **({"precision": prec} if prec else {}))
    check_error_bound(spec)
    report.check("spec satisfies the error bound", True, "formula")
    if args.check and kind != "cyclic":
        res = full_check(spec, trials=args.trials, seed=args.seed, exhaustive=False)
        report.check("direct breaks match formula", res.direct_matches, "oracle", f"{res.direct.values}")
        report.check("Herbrand round trip", res.herbrand_ok, "formula")
        for k, t in enumerate(res.trials):
            report.add("trial", trial=k, v_rho=t.v_rho, rows=tower_rows(spec), passed=t.rows_passed,
                       residues_complete=t.residues_complete, source="oracle")
        report.check("normal basis checks", res.normal_basis_ok, "oracle")
    report.add(**spec_record(spec))
    text = emit_spec(spec, comment=f"generated by: galscaffold example {kind}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    report.spec_text = text  # type: ignore[attr-defined]


COMMANDS: dict[str, Callable] = {
    "validate": cmd_validate,
    "breaks": cmd_breaks,
    "scaffold": cmd_scaffold,
    "verify": cmd_verify,
    "example": cmd_example,
}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, LaurentSeries):
        return format_series(v)
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if v is None:
        return "-"
    if isinstance(v, float) and v == INF:
        return "inf"
    if isinstance(v, (list, tuple)):
        return "(" + ",".join(_cell(x) for x in v) + ")"
    return str(v)


def _table(headers: Sequence[str], rows: Sequence[Sequence]) -> list[str]:
    def fmt(h, v):
        if isinstance(v, bool) and h != "passed":
            return "yes" if v else "no"
        return _cell(v)
    cells = [[fmt(h, v) for h, v in zip(headers, r)] for r in rows]
    widths = [max([len(h)] + [len(r[k]) for r in cells]) for k, h in enumerate(headers)]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    out.append("  ".join("-" * w for w in widths))
    out += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return out


_TABLE_COLUMNS = {
    "bound": ("i", "valuation", "rhs", "passed", "reducible"),
    "break": ("index", "lower", "upper", "m", "source"),
    "direct": ("sigma", "i_sigma", "source"),
    "row": ("trial", "a", "predicted", "measured", "passed", "source"),
    "trial": ("trial", "v_rho", "rows", "residues_complete", "passed"),
    "alpha": ("index", "value", "valuation"),
}


def render_table(report: Report) -> str:
    lines: list[str] = []
    groups: list[tuple[str, list[dict]]] = []
    for rec in report.records:
        if groups and groups[-1][0] == rec["kind"]:
            groups[-1][1].append(rec)
        else:
            groups.append((rec["kind"], [rec]))
    for kind, recs in groups:
        if kind in _TABLE_COLUMNS:
            cols = _TABLE_COLUMNS[kind]
            lines += [f"[{kind}]"] + _table(cols, [[r.get(c) for c in cols] for r in recs]) + [""]
        elif kind == "check":
            for r in recs:
                tail = f"  ({r['detail']})" if r["detail"] else ""
                lines.append(f"{_cell(r['passed']):4}  {r['name']}  [{r['source']}]{tail}")
            lines.append("")
        elif kind == "matrix":
            lines.append(f"[{recs[0]['name']}]")
            lines += _table(["row"] + [str(j) for j in range(len(recs[0]["entries"]))],
                            [[r["row"]] + r["entries"] for r in recs])
            lines.append("")
        elif kind == "theta":
            for r in recs:
                lines.append(f"[Theta_({r['index']})]")
                lines += _table(["sigma", "coefficient"], r["terms"])
                lines.append("")
        elif kind == "herbrand":
            for r in recs:
                lines.append(f"herbrand: lower {_cell(r['lower'])} orders {_cell(r['orders'])} -> upper "
                             f"{_cell(r['upper'])} -> lower {_cell(r['round_trip'])}  {_cell(r['passed'])}")
            lines.append("")
        elif kind == "spec":
            r = recs[0]
            lines.append(f"spec: p={r['p']} f={r['f']} n={r['n']} b={r['b']} precision={r['precision']}")
            lines.append("")
        elif kind == "summary":
            r = recs[0]
            lines.append(f"{r['command']}: {'PASS' if r['passed'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", metavar="PATH", help="tower spec file")
    common.add_argument("--precision", type=int, metavar="N", help="override the working precision")
    common.add_argument("--seed", type=int, default=0, metavar="N", help="random seed (default 0)")
    common.add_argument("--trials", type=int, default=10, metavar="N", help="random trials (default 10)")
    common.add_argument("--format", choices=("table", "records"), default="table", help="output format")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr")

    parser = argparse.ArgumentParser(prog="galscaffold", description=__doc__.split("\n\n")[0],
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a spec and the error-term bound")
    br = sub.add_parser("breaks", parents=[common], help="break numbers: formula, direct and Herbrand")
    br.add_argument("--exhaustive", action="store_true", help="evaluate every group element")
    sub.add_parser("scaffold", parents=[common], help="emit the scaffold matrices, Thetas and alphas")
    sub.add_parser("verify", parents=[common], help="compare predicted and oracle valuations")
    ex = sub.add_parser("example", parents=[common], help="emit a spec from a generator")
    ex.add_argument("kind", choices=("cyclic", "biquadratic", "unitroot", "weak"))
    ex.add_argument("--p", type=int, default=2, help="characteristic")
    ex.add_argument("--f", type=int, default=1, help="residue degree of F_q over F_p")
    ex.add_argument("--n", type=int, default=1, help="tower height (weak)")
    ex.add_argument("--f-sub", type=int, default=2, help="degree of the unit-root subfield (unitroot)")
    ex.add_argument("--beta", help="series literal for beta")
    ex.add_argument("--beta1", help="series literal for beta_1 (biquadratic)")
    ex.add_argument("--units", help="';'-separated F_q literals (weak)")
    ex.add_argument("--epsilons", help="';'-separated series literals (weak)")
    ex.add_argument("--out", metavar="PATH", help="also write the spec file here")
    ex.add_argument("--check", action="store_true", help="run the full pipeline on the emitted spec")
    return parser


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO, stream=err,
                            format="%(levelname)s %(name)s: %(message)s")
    logger.info("kernel backend: %s", kernels.BACKEND)
    if args.trials < 0:
        args.trials = 0
    report = Report(args.command)
    status = EXIT_OK
    error = None
    try:
        COMMANDS[args.command](args, report)
    except ScaffoldError as exc:
        error = exc.record()
        report.passed = False
        status = EXIT_ERROR
    except (ArithmeticError, AssertionError, ValueError, OverflowError) as exc:
        # internal consistency failures still produce a machine-readable record
        logger.debug("unexpected failure", exc_info=True)
        error = {"code": type(exc).__name__, "module": type(exc).__module__.rpartition(".")[2], "detail": str(exc)}
        report.passed = False
        status = EXIT_ERROR
    report.finish(error["code"] if error else "")
    if status == EXIT_OK and not report.passed:
        status = EXIT_FAILED
    if args.format == "records":
        for rec in report.records:
            if rec["kind"] == "summary" and error:
                out.write(format_record({"kind": "error", **error}) + "\n")
            out.write(format_record(rec) + "\n")
    else:
        text = getattr(report, "spec_text", None)
        if text and not args.out:
            out.write(text + "\n")
        out.write(render_table(report))
        if error:
            err.write(format_record({"kind": "error", **error}) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":  # pragma: no cover
    main()
