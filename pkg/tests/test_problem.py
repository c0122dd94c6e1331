import copy
import json

import pytest

from musym.problem import ProblemError, fixture_names, load, load_data, resolve

FIXTURES = fixture_names()


def test_bundled_fixtures():
    corpus = [n for n in FIXTURES if n.startswith("ex")]
    assert [n[:4] for n in corpus] == [f"ex{k:02d}" for k in range(1, 11)]
    assert "no_invariant_solutions" in FIXTURES


@pytest.mark.parametrize("name", FIXTURES)
def test_every_fixture_loads(name):
    pb = load(name)
    assert pb.system.equations and pb.fields


def test_resolve_examples_path():
    assert resolve("examples/ex08_euler.json").name == "ex08_euler.json"
    with pytest.raises(ProblemError):
        resolve("missing.json")


def _data():
    return json.loads(resolve("ex04_kdv").read_text())


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d.pop("equations"), "schema violation"),
    (lambda d: d.update(schema=2), "schema violation"),
    (lambda d: d["equations"][0].update(expr="u_t + q"), "unknown identifier"),
    (lambda d: d.update(mu=["1/x"]), "one entry per independent"),
    (lambda d: d.update(gamma=[["1", "0"], ["0", "1"]]), "1x1|matrices must be"),
    (lambda d: d["equations"][0].update(solve_for="u_xx"), None),
])
def test_invalid_files(mutate, match):
    d = copy.deepcopy(_data())
    mutate(d)
    with pytest.raises(ProblemError, match=match):
        load_data(d)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ProblemError, match="invalid JSON"):
        load(str(p))


def test_require_names_the_missing_key():
    pb = load("ex01_scaling")
    with pytest.raises(ProblemError, match="nonlocal_P"):
        pb.require("P", "nonlocal")


def test_branch_assumptions_are_reported():
    assert load("ex07_system_partial").assumptions == ["branch assumption v_x > 0 (abs dropped)"]
