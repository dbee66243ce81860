import csv
import io
import json
import math

import pytest

from dunkl_hardy import kernels as kz
from dunkl_hardy.cli import COLUMNS, fmt_float, main
from dunkl_hardy.measure import WeightedMeasure
from dunkl_hardy.special import LambdaParam
from dunkl_hardy.suites import SuiteConfig, VerificationReport, kernel_class_report


def run_cli(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_bytes() if out.exists() else b""


def parse_csv(data: bytes):
    lines = data.decode().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(ln for ln in lines if not ln.startswith("#")))))
    return comments, rows


def test_fmt_float_round_trips():
    for v in (0.1, 1 / 3, 2.0**-1074, 1e300, -0.0):
        assert float(fmt_float(v)) == v
    assert [fmt_float(v) for v in (math.nan, math.inf, -math.inf)] == ["nan", "inf", "-inf"]


def test_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(profile="medium")
    with pytest.raises(ValueError):
        SuiteConfig(lambdas=(-1.0,))
    with pytest.raises(ValueError):
        SuiteConfig(ps=(0.0,))


def test_exit_code_precedence():
    rep = VerificationReport("t", SuiteConfig())
    rep.info("note", 1.0, 1.0, 5.0)
    assert rep.exit_code == 0
    rep.add("bracket", 1.0, 1.0, 3.0, 0.0, 1.0)
    assert rep.exit_code == 2
    rep.add("identity", 1.0, 1.0, 3.0, 0.0, 1.0, severity="identity")
    assert rep.exit_code == 1
    rep.add("nan_value", 1.0, 1.0, math.nan, -math.inf, math.inf)
    assert rep.records[-1].status == "fail"


def test_classical_kernel_run_is_deterministic(tmp_path):
    args = ("kernel", "--lambda", "0", "--profile", "fast", "--seed", "7")
    c1, a = run_cli(tmp_path, *args, name="a.csv")
    c2, b = run_cli(tmp_path, *args, name="b.csv")
    assert c1 == c2 == 0
    assert a == b
    assert b"\r" not in a
    comments, rows = parse_csv(a)
    assert any(c.startswith("# seed: 7") for c in comments)
    assert tuple(rows[0]) == COLUMNS
    assert all(len(r) == len(COLUMNS) for r in rows[1:])
    checks = {r[1] for r in rows[1:]}
    assert "classical_limit" in checks
    assert "symmetry" not in checks


def test_seed_changes_the_report(tmp_path):
    _, a = run_cli(tmp_path, "kernel", "--lambda", "0", "--profile", "fast", "--seed", "1", name="a")
    _, b = run_cli(tmp_path, "kernel", "--lambda", "0", "--profile", "fast", "--seed", "2", name="b")
    assert a != b


def test_json_mirrors_csv(tmp_path):
    args = ("kernel", "--lambda", "0", "--profile", "fast")
    _, c = run_cli(tmp_path, *args, name="r.csv")
    code, j = run_cli(tmp_path, *args, "--format", "json", name="r.json")
    doc = json.loads(j)
    _, rows = parse_csv(c)
    assert doc["exit_code"] == code == 0
    assert len(doc["records"]) == len(rows) - 1
    for rec, row in zip(doc["records"], rows[1:]):
        assert rec["check"] == row[1]
        if row[4] not in ("nan", "inf", "-inf"):
            assert rec["value"] == float(row[4])
        else:
            assert rec["value"] == row[4]


def test_identity_failure_exits_one(tmp_path):
    # the scale kernel is not symmetric in (x, t), so the symmetry row fails
    code, data = run_cli(tmp_path, "kernel", "--lambda", "0.5", "--profile", "fast")
    assert code == 1
    _, rows = parse_csv(data)
    status = {r[1]: r[7] for r in rows[1:]}
    assert status["symmetry"] == "fail"
    assert status["scale_invariance"] == "pass"
    assert status["jump_detected"] == "pass"


@pytest.mark.slow
def test_bracket_failure_exits_two(tmp_path):
    code, data = run_cli(tmp_path, "counterexample", "--profile", "fast", "--m", "1")
    assert code == 2
    _, rows = parse_csv(data)
    status = {r[1]: r[7] for r in rows[1:]}
    assert status["counterexample_slope[m=1]"] == "fail"
    assert status["counterexample_mass[m=1]"] == "pass"


@pytest.mark.parametrize(
    "args",
    [
        ("kernel", "--lambda", "x"),
        ("kernel", "--lambda", "-1"),
        ("kernel", "--p", "3"),
        ("kernel", "--profile", "medium"),
        ("counterexample", "--m", "0", "--p", "1"),
        ("counterexample", "--m", "-2"),
        ("kernel", "--seed", "-5"),
        ("bogus",),
    ],
)
def test_configuration_errors_exit_64(tmp_path, args):
    with pytest.raises(SystemExit) as info:
        code = main([*args, "--out", str(tmp_path / "o")])
        raise SystemExit(code)
    assert info.value.code == 64


def test_kernel_class_report_flags_injected_jump():
    cfg = SuiteConfig(profile="fast")
    lp = LambdaParam(0.5)
    clean = kernel_class_report(kz.poisson_scale_kernel(lp), cfg, lp.lam)
    assert clean.exit_code == 0
    bad = kernel_class_report(kz.injected_jump_kernel(kz.poisson_scale_kernel(lp)), cfg, lp.lam)
    assert bad.exit_code == 1
    assert [r.check for r in bad.failures()] == ["class_condition[holder]"]
    tri = kernel_class_report(kz.triangular_kernel(WeightedMeasure.dunkl(0.5)), cfg)
    assert tri.exit_code == 0
