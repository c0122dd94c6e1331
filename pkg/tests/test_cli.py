import json

import pytest

from musym.cli import main
from musym.expr import normalize
from musym.problem import load, resolve


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_check_mu_euler(capsys):
    code, out = run(capsys, "check-mu", "examples/ex08_euler.json")
    assert code == 0
    assert "μ-symmetry: Verified (on S_Δ); compatibility: OnSolutionManifold" in out


def test_partial_kdv(capsys):
    code, out = run(capsys, "partial", "--max-order", "4", "examples/ex04_kdv.json")
    assert code == 0
    assert "order 2" in out and "Delta^(1): ['-2*u_xxx/(t*x)']" in out


def test_incompatible_mu_exits_3(capsys, tmp_path):
    data = json.loads(resolve("ex04_kdv").read_text())
    data["mu"] = ["u", "0"]
    p = tmp_path / "bad_mu.json"
    p.write_text(json.dumps(data))
    code, out = run(capsys, "check-mu", str(p))
    assert code == 3 and "incompatible μ" in out


def test_refuted_exits_1(capsys):
    code, out = run(capsys, "check-standard", "ex04_kdv")
    assert code == 1 and "Refuted" in out and "witness" in out


def test_skipped_exits_2(capsys):
    code, out = run(capsys, "gauge", "--derive-potential", "ex08_euler")
    assert code == 2 and "Skipped" in out


def test_missing_input_exits_3(capsys):
    code, out = run(capsys, "nonlocal", "ex01_scaling")
    assert code == 3 and "nonlocal_P" in out
    assert run(capsys, "check-mu", "no_such_file.json")[0] == 3


def test_unknown_command_exits_3(capsys):
    assert main(["frobnicate", "ex01_scaling"]) == 3
    capsys.readouterr()


def test_bad_trials(capsys):
    assert main(["oracle", "ex01_scaling", "--trials", "0"]) == 3


def test_json_report_and_round_trip(capsys):
    code, out = run(capsys, "check-standard", "ex06_system", "ex01_scaling", "--format", "json", "--seed", "3")
    report = json.loads(out)
    assert code == 1
    assert set(report) >= {"command", "fixtures", "checks", "seed", "tolerances"}
    assert report["seed"] == 3 and report["tolerances"] == {"trials": 20, "tol": 1e-9}
    for c in report["checks"]:
        assert set(c) >= {"kind", "outcome", "strength", "residuals", "witnesses", "notes"}
    pb = load("ex06_system")
    from musym.symcheck import check_standard_symmetry
    v = check_standard_symmetry(pb.fields[0].field, pb.system, seed=3)
    printed = report["checks"][0]["residuals"]
    assert all(normalize(pb.expr(t) - r) == 0 for t, r in zip(printed, v.residuals))


def test_gauge_verify_reports_sign(capsys):
    code, out = run(capsys, "gauge", "--verify", "ex06_system")
    assert "declared gauged field = -gamma*Q" in out
    assert "gauge-factor gamma: Global" in out


def test_gauge_derives_arctan(capsys):
    code, out = run(capsys, "gauge", "--derive-potential", "ex02_rotation", "--format", "json")
    check = json.loads(out)["checks"][0]
    assert code == 0 and check["potential"] == "arctan(y/x)"


def test_reports_disclose_assumptions(capsys):
    code, out = run(capsys, "verify-solution", "ex07_system_partial")
    assert code == 0
    assert "branch assumption v_x > 0" in out and "one-sided limit" in out


@pytest.mark.parametrize("argv,expected", [
    (["compat", "ex09_cdis"], 0),
    (["invariants", "ex03_complex_scaling"], 0),
    (["reduce", "ex04_kdv"], 0),
    (["conditional", "no_invariant_solutions"], 0),
    (["nonlocal", "ex08_euler"], 0),
    (["oracle", "ex10_burgers"], 0),
    (["check-mu", "--strong", "ex08_euler"], 1),
])
def test_exit_codes(capsys, argv, expected):
    code, out = run(capsys, *argv)
    assert code == expected, out
    assert out.strip().endswith(f"exit {expected}")
