import csv
import io
import json
import subprocess
import sys

import pytest

from pjx.cli import main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def test_parse_range():
    assert parse_range("0:1:0.25") == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])
    assert parse_range("0.3") == [0.3]


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "1", "--q", "1")
    d = json.loads(out)
    assert code == 0 and d["linfty"] == "TwoSidedEverywhere"


def test_classify_csv(capsys):
    code, out, _ = run(capsys, "classify", "--lambda", "0.5", "--q", "1.2", "--format", "csv", "--p", "1", "4")
    rows = csv_rows(out)
    assert code == 0 and [r["p"] for r in rows] == ["1.0", "4.0"]
    assert out.startswith("# ")


def test_blowup_example5(capsys):
    code, out, _ = run(capsys, "blowup", "--builtin", "ex5_mixed")
    d = json.loads(out)
    assert code == 0
    assert d["t_star"] == pytest.approx(17.93, abs=0.05)
    assert sorted(loc["x"] for loc in d["locations"]) == pytest.approx([0.885, 1.0], abs=0.005)


def test_blowup_global_reports_inf(capsys):
    code, out, _ = run(capsys, "blowup", "--builtin", "ex2_q5")
    assert code == 0 and json.loads(out)["t_star"] == "inf"


def test_blowup_example1(capsys):
    code, out, _ = run(capsys, "blowup", "--builtin", "ex1_q13")
    assert json.loads(out)["t_star"] == pytest.approx(2.25, abs=1e-6)


def test_solve_fifty_frames(tmp_path, capsys):
    code, _, _ = run(capsys, "solve", "--builtin", "ex6_linear", "--eta", "0:1.96:0.04", "--grid", "11", "--out", str(tmp_path))
    assert code == 0
    frames = csv_rows((tmp_path / "frames.csv").read_text())
    summary = csv_rows((tmp_path / "summary.csv").read_text())
    assert len(summary) == 50 and len(frames) == 50 * 11
    first = [r for r in frames if float(r["eta"]) == 0.0]
    from pjx.profiles import builtin

    p = builtin("ex6_linear")
    for r in first:
        assert float(r["ux"]) == pytest.approx(float(p.u0p(float(r["alpha"]))), abs=1e-12)


def test_solve_by_time(capsys):
    code, out, _ = run(capsys, "solve", "--builtin", "ex6_linear", "--t", "0:1:0.5")
    rows = csv_rows(out)
    assert code == 0 and [float(r["t"]) for r in rows] == pytest.approx([0, 0.5, 1.0], abs=1e-9)


def test_solve_past_eta_star(capsys):
    code, _, err = run(capsys, "solve", "--builtin", "ex6_linear", "--eta", "2.5")
    assert code == 3 and "eta*" in err


def test_bad_inputs(capsys):
    assert run(capsys, "classify", "--lambda", "1")[0] == 2
    assert run(capsys, "classify", "--lambda", "1", "--q", "-1")[0] == 2
    assert run(capsys, "blowup", "--builtin", "nope")[0] == 2
    assert run(capsys, "blowup", "--profile-json", "{not json")[0] == 2
    assert run(capsys, "solve", "--builtin", "ex6_linear", "--eta", "0.1", "--grid", "1")[0] == 2
    assert run(capsys, "example", "9")[0] == 2


def test_deterministic_with_threads(monkeypatch, capsys):
    argv = ["solve", "--builtin", "ex2_q5", "--eta", "0:0.2:0.02"]
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("PJX_THREADS", "4")
    _, b, _ = run(capsys, *argv)
    assert a == b


@pytest.mark.parametrize("key", ["1a", "4", "6"])
def test_example_passes(tmp_path, capsys, key):
    code, out, _ = run(capsys, "example", key, "--out", str(tmp_path))
    assert code == 0 and out.strip() == f"example {key}: PASS"
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["result"] == "PASS"
    assert (tmp_path / "frames.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pjx", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "pjx" in r.stdout
