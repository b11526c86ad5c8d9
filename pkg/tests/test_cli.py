import json

import pytest

from equifocal import cli, report, scenarios
from equifocal.errors import UsageError


def _numbers_without_tolerance(obj, path=""):
    """Paths of numbers that are not inside a {value, tol, relation} record."""
    if isinstance(obj, dict):
        if set(obj) == {"value", "tol", "relation"}:
            return []
        return [p for k, v in obj.items() for p in _numbers_without_tolerance(v, f"{path}.{k}")]
    if isinstance(obj, list):
        return [p for i, v in enumerate(obj) for p in _numbers_without_tolerance(v, f"{path}[{i}]")]
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return [path]
    return []


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("cp2-reconstruction", "cpn-rpn-quadric", "point-focal-korbit", "sphere-isoparametric-codim2"):
        assert name in out


def test_describe_cites_hermann_pair(capsys):
    assert cli.main(["describe", "cp2-reconstruction"]) == 0
    out = capsys.readouterr().out
    assert "SU(3)" in out and "S(U(1)xU(2))" in out


def test_describe_unknown_is_usage_error(capsys):
    assert cli.main(["describe", "no-such-scenario"]) == 2
    assert "unknown scenario" in capsys.readouterr().err


def test_empty_checks_gives_germ_summary(tmp_path):
    doc = {"name": "empty", "pair": {"germ": "cp2"},
           "action": {"kind": "hermann", "subalgebra": {"involution": "diag:-1,1,1"}}, "checks": []}
    path = tmp_path / "empty.json"
    path.write_text(json.dumps(doc))
    assert cli.main(["run", str(path), "--out", str(tmp_path / "out")]) == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["checks"] == [] and rep["passed"]
    assert rep["germ"]["dim_orbit"]["value"] == 2


@pytest.mark.parametrize("doc,msg", [
    ({"pair": {"germ": "cp2"}, "action": {"kind": "srep", "z0": {}}, "checks": []}, "name"),
    ({"name": "x", "pair": {"germ": "cp2"}, "action": {"kind": "orbit"}, "checks": []}, "action.kind"),
    ({"name": "x", "pair": {"germ": "cp2"}, "action": {"kind": "srep", "z0": {}}, "checks": ["magic"]}, "unknown checks"),
    ({"name": "x", "pair": {"germ": "cp2"}, "action": {"kind": "hermann", "subalgebra": "isotropy"},
      "checks": ["equifocal"]}, "xi"),
    ({"name": "x", "pair": {"germ": "cp2"}, "action": {"kind": "srep", "z0": {}}, "checks": [],
      "expect": {"equifocal.abelian": False}}, "not run"),
])
def test_schema_violations(doc, msg):
    with pytest.raises(UsageError, match=msg):
        scenarios.load_scenario(doc)


def test_bad_labels_and_indices(cp2):
    doc = {"name": "x", "pair": {"germ": "cp2"}, "action": {"kind": "srep", "z0": {"Q7": 1.0}}, "checks": []}
    with pytest.raises(UsageError):
        scenarios.build_orbit(scenarios.load_scenario(doc), cp2)
    with pytest.raises(UsageError):
        scenarios.normal_coefficients({"indices": [5]}, 2)
    with pytest.raises(UsageError):
        scenarios.normal_coefficients({"coefficients": [1.0]}, 2)


def test_schema_violation_exit_status(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad"}))
    assert cli.main(["run", str(path)]) == 2


def test_run_is_deterministic_and_tagged(tmp_path):
    sc = scenarios.load_scenario("veronese-srep-transport")
    a, csv_a = cli.run_scenario(sc)
    b, _ = cli.run_scenario(sc)
    assert report.dumps(a) == report.dumps(b)
    assert a["passed"]
    assert _numbers_without_tolerance(json.loads(report.dumps(a))) == []
    assert all(text.splitlines()[0] == ",".join(report.FOCAL_CSV_COLUMNS) for text in csv_a.values())


def test_failing_check_gives_nonzero_status(tmp_path):
    """Declaring the wrong expectation turns a passing check into a failure."""
    doc = scenarios.load_scenario("veronese-srep-transport")
    data = {"name": doc.name, "pair": doc.pair, "action": doc.action, "checks": ["transport"],
            "expect": {"transport.isometries_transport": False}}
    path = tmp_path / "wrong.json"
    path.write_text(json.dumps(data))
    assert cli.main(["run", str(path), "--out", str(tmp_path / "o")]) == 1
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["checks"][0]["mismatched"] == ["isometries_transport"]


def test_measure_records():
    assert report.measure(3) == {"value": 3, "tol": 0, "relation": "=="}
    m = report.measure(1e-9, 1e-6)
    assert m["relation"] == "<=" and m["tol"] == 1e-6
    with pytest.raises(TypeError):
        report.measure(True)
