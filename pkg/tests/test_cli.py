import io
import json

import pytest

from cckrein.cli import main, parse_report
from cckrein.config_model import parse_configuration


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_krein_gq_w2(capsys):
    code, out, _ = run(capsys, "krein", "--gen", "gq-w2")
    assert code == 0
    report = parse_report(out)
    assert report["verdict"]["status"] == "pass"
    assert all(t["psd"] for t in report["krein"]["triples"])
    assert report["meta"]["seed"] == 42


def test_krein_grid_boundary(capsys):
    code, out, _ = run(capsys, "krein", "--gen", "gq-grid", "2")
    assert code == 0
    report = parse_report(out)
    assert "Q_{4,4}^4" in report["verdict"]["boundary"]
    entry = next(t for t in report["krein"]["triples"] if t["label"] == "Q_{4,4}^4")
    assert abs(entry["min_eigenvalue"]) < 1e-8


def test_krein_text_format(capsys):
    code, out, _ = run(capsys, "krein", "--gen", "gq-grid", "2", "--format", "text")
    assert code == 0
    line = next(x for x in out.splitlines() if x.strip().startswith("boundary"))
    assert "Q_{4,4}^4" in line
    assert "verdict: pass" in out


def test_non_commutative_rejected(capsys):
    code, out, err = run(capsys, "decompose", "--gen", "s3-point")
    assert code == 1 and out == ""
    assert "fiber index 0" in err and "colors" in err


def test_gq_feasibility_infeasible(capsys):
    code, out, _ = run(capsys, "gq", "feasibility", "2", "5", "--format", "text")
    assert code == 2
    assert out.strip() == "infeasible: Q_{3,3}^3 = -11/49 < 0"


def test_gq_feasibility_json(capsys):
    code, out, _ = run(capsys, "gq", "feasibility", "2", "4")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "boundary" and doc["witness"] == "Q_{3,3}^3"


def test_gq_sweep(capsys):
    code, out, _ = run(capsys, "gq", "feasibility", "--sweep", "2..6", "2..6")
    assert code == 2
    rows = json.loads(out)["sweep"]
    bad = {(int(r["s"]), int(r["t"])) for r in rows if r["verdict"] == "infeasible"}
    assert bad == {(2, 5), (2, 6), (5, 2), (6, 2)}


def test_gq_closed_form(capsys):
    code, out, _ = run(capsys, "gq", "closed-form", "2", "2")
    doc = json.loads(out)
    assert code == 0
    by_label = {m["label"]: m for m in doc["matrices"]}
    assert by_label["Q_{3,3}^3"]["exact"] == "5/8"
    assert by_label["Q_{2,2}^1"]["matrix"]["re"] == [[9.0, 9.0], [9.0, 9.0]]
    assert by_label["Q_{2,2}^2"]["matrix"]["re"] == [[4.875, 4.5], [4.5, 4.875]]
    assert doc["multiplicities"] == ["1", "9", "5", "5"]


def test_gq_build_pipes_into_validate(capsys, monkeypatch):
    code, out, _ = run(capsys, "gq", "build", "2", "2")
    assert code == 0
    cc = parse_configuration(out)
    assert cc.fiber_sizes == (15, 15)
    code, out, _ = run(capsys, "validate", "-", stdin=out, monkeypatch=monkeypatch)
    assert code == 0 and parse_report(out)["validation"]["rank"] == 10


def test_gq_build_unknown(capsys):
    code, _, err = run(capsys, "gq", "build", "3", "3")
    assert code == 1 and "no construction" in err


def test_file_input(capsys, tmp_path):
    path = tmp_path / "c5.json"
    path.write_text(json.dumps({"fibers": [5], "colors": [[min(abs(i - j), 5 - abs(i - j))
                                                            for j in range(5)] for i in range(5)]}))
    code, out, _ = run(capsys, "krein", str(path))
    assert code == 0
    assert parse_report(out)["meta"]["source"] == str(path)


def test_invalid_axioms_exit_2(capsys, tmp_path):
    path = tmp_path / "path.json"
    path.write_text(json.dumps({"fibers": [3], "colors": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}))
    code, out, _ = run(capsys, "validate", str(path))
    report = parse_report(out)
    assert code == 2 and report["verdict"]["status"] == "invalid"
    assert "4" in report["validation"]["witnesses"]


@pytest.mark.parametrize("argv", [
    ["krein"],
    ["krein", "--gen", "nope"],
    ["krein", "--gen", "cyclic"],
    ["krein", "--gen", "cyclic", "x"],
    ["krein", "--gen", "cyclic", "2"],
    ["krein", "/nonexistent/file.json"],
    ["krein", "--gen", "gq-w2", "--tol-psd", "0"],
    ["krein", "--gen", "gq-w2", "--jobs", "0"],
    ["gq", "feasibility"],
    ["gq", "feasibility", "--sweep", "3..2", "1..2"],
    ["gq", "closed-form", "0", "2"],
    ["frobnicate"],
])
def test_usage_errors(capsys, monkeypatch, argv):
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_malformed_stdin(capsys, monkeypatch):
    code, _, err = run(capsys, "validate", "-", stdin="{bad", monkeypatch=monkeypatch)
    assert code == 1 and "invalid JSON" in err


def test_bounds_report(capsys):
    code, out, _ = run(capsys, "bounds", "--gen", "gq-w2")
    report = parse_report(out)
    pairs = {tuple(b["pair"]): b for b in report["bounds"]}
    assert code == 0
    assert (pairs[(2, 2)]["lhs"], pairs[(2, 2)]["rhs"], pairs[(2, 2)]["tight"]) == (15, 15, True)
    assert (pairs[(1, 1)]["lhs"], pairs[(1, 1)]["rhs"]) == (29, 45)


def test_decompose_summary(capsys):
    code, out, _ = run(capsys, "decompose", "--gen", "directed-cycle", "3")
    ideals = parse_report(out)["ideals"]
    assert code == 0
    assert [I["partner"] for I in ideals["ideals"]] == [0, 2, 1]


@pytest.mark.parametrize("argv", [
    ["krein", "--gen", "gq-w2"],
    ["krein", "--gen", "directed-cycle", "5", "--seed", "7"],
    ["gq", "closed-form", "3", "2"],
])
def test_byte_identical(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_parallel_output_identical(capsys):
    _, a, _ = run(capsys, "krein", "--gen", "gq-w2")
    _, b, _ = run(capsys, "krein", "--gen", "gq-w2", "--jobs", "3")
    da, db = json.loads(a), json.loads(b)
    da["meta"].pop("jobs"), db["meta"].pop("jobs")
    assert da == db


def test_report_round_trip(capsys):
    _, out, _ = run(capsys, "krein", "--gen", "hamming-2-2")
    doc = parse_report(out)
    assert json.dumps(doc, indent=2, sort_keys=True) + "\n" == out


def test_parse_report_rejects_other_layouts():
    with pytest.raises(ValueError):
        parse_report('{"meta": {}}')
