"""Command line: exit codes, records, determinism and the documented examples."""

import io
import json

import pytest

from galscaffold.cli import run
from galscaffold.specio import parse_records, parse_spec

REF1 = """\
# galscaffold tower spec
p = 2
f = 1
n = 1
precision = 64
beta = t^-1
omega[0] = 1
omega[1] = t^-1
epsilon[0] = 0
epsilon[1] = 0
"""


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def ref1_path(tmp_path):
    path = tmp_path / "ref1.spec"
    path.write_text(REF1)
    return str(path)


def records(text):
    return list(parse_records(text))


def test_breaks_rows(ref1_path):
    code, out, _ = invoke("breaks", "--spec", ref1_path, "--format", "records")
    assert code == 0
    rows = [(r["index"], r["lower"], r["upper"], r["m"]) for r in records(out) if r["kind"] == "break"]
    assert rows == [(0, 1, 1, None), (1, 5, 3, 1)]
    direct = {r["i_sigma"] for r in records(out) if r["kind"] == "direct"}
    assert direct == {1, 5}


def test_verify_reference(ref1_path):
    code, out, _ = invoke("verify", "--spec", ref1_path, "--seed", "1", "--trials", "10", "--format", "records")
    assert code == 0
    recs = records(out)
    rows = [r for r in recs if r["kind"] == "row"]
    assert len(rows) == 40 and all(r["passed"] for r in rows)
    assert all(r["source"] == "formula/oracle" for r in rows)
    assert {r["trial"] for r in rows} == set(range(10))
    assert recs[-1]["kind"] == "summary" and recs[-1]["passed"] is True


def test_validate_rejects_gcd(tmp_path):
    path = tmp_path / "bad.spec"
    path.write_text(REF1.replace("beta = t^-1", "beta = t^-2"))
    code, out, _ = invoke("validate", "--spec", str(path), "--format", "records")
    assert code != 0
    err = [r for r in records(out) if r["kind"] == "error"]
    assert err and err[0]["code"] == "InvalidSpec" and err[0]["module"] == "tower"
    assert "gcd" in err[0]["detail"]
    assert list(err[0]) == ["kind", "code", "module", "detail"]


def test_error_record_in_table_mode(tmp_path):
    path = tmp_path / "bad.spec"
    path.write_text(REF1.replace("omega[1] = t^-1", "omega[1] = 1"))
    code, out, err = invoke("validate", "--spec", str(path))
    assert code == 2
    rec = json.loads(err.strip().splitlines()[-1])
    assert rec["code"] == "InvalidSpec" and "independence" in rec["detail"]


def test_bound_violation_exit(tmp_path):
    path = tmp_path / "bound.spec"
    path.write_text(REF1.replace("epsilon[1] = 0", "epsilon[1] = t^-3 + O(t^4)"))
    code, out, _ = invoke("validate", "--spec", str(path), "--format", "records")
    assert code == 2
    codes = {r["code"] for r in records(out) if r["kind"] == "error"}
    assert codes & {"BoundViolated", "InvalidSpec"}


def test_missing_spec_file():
    code, out, _ = invoke("validate", "--spec", "/nonexistent/x.spec", "--format", "records")
    assert code == 2
    assert records(out)[0]["code"] == "InvalidInput"


@pytest.mark.parametrize("cmd", ["validate", "breaks", "scaffold", "verify"])
def test_output_is_deterministic(ref1_path, cmd):
    a = invoke(cmd, "--spec", ref1_path, "--seed", "7", "--trials", "3", "--format", "records")
    b = invoke(cmd, "--spec", ref1_path, "--seed", "7", "--trials", "3", "--format", "records")
    assert a == b and a[0] == 0
    t1 = invoke(cmd, "--spec", ref1_path, "--seed", "7", "--trials", "3")
    t2 = invoke(cmd, "--spec", ref1_path, "--seed", "7", "--trials", "3")
    assert t1 == t2


def test_scaffold_records(ref1_path):
    code, out, _ = invoke("scaffold", "--spec", ref1_path, "--format", "records")
    assert code == 0
    recs = records(out)
    delta = [r for r in recs if r["kind"] == "matrix" and r["name"] == "Delta"]
    assert delta[0]["entries"][1] == [[-1, "1"]]
    alphas = {r["index"]: r["valuation"] for r in recs if r["kind"] == "alpha"}
    assert alphas == {0: 2, 1: 0}


@pytest.mark.parametrize("argv", [
    ["cyclic", "--p", "3"],
    ["biquadratic", "--beta1", "t^-3 + t^-1"],
    ["unitroot", "--p", "2", "--f-sub", "2"],
    ["weak", "--p", "2", "--n", "1"],
])
def test_examples_emit_parseable_specs(tmp_path, argv):
    path = tmp_path / "ex.spec"
    code, out, _ = invoke("example", *argv, "--out", str(path), "--check", "--trials", "2",
                          "--format", "records")
    assert code == 0, out
    spec = parse_spec(path.read_text())
    rec = [r for r in records(out) if r["kind"] == "spec"][0]
    assert rec["p"] == spec.p and rec["n"] == spec.n
    code, _, _ = invoke("validate", "--spec", str(path))
    assert code == 0


def test_example_table_prints_spec():
    code, out, _ = invoke("example", "biquadratic")
    assert code == 0
    assert "omega[1] = t^-1" in out


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        invoke("frobnicate")
    assert exc.value.code == 2
