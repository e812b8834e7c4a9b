import csv
import io
import json
import subprocess
import sys

import pytest

from rellich.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_json(capsys):
    code, out, err = _run(capsys, "constants", "--n", "5", "--alpha", "2")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["command"] == "constants" and "timestamp" in rep
    assert rep["results"][0]["mu_closed"] == pytest.approx(5.0625)
    assert "mu closed form" in err


def test_deterministic_output_is_byte_identical(capsys, tmp_path):
    args = ["mu", "--n", "5", "--alpha", "2", "--grid-points", "1024", "--deterministic"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert "timestamp" not in json.loads(a.read_text())


def test_verify_passes(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "rellich", "--n", "5", "--alpha", "2",
                        "--samples", "20", "--deterministic")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["violations"] == []


def test_degenerate_failed_check_exits_one(capsys):
    assert _run(capsys, "degenerate", "--n", "5", "--alpha", "7")[0] == EXIT_OK
    code, out, err = _run(capsys, "degenerate", "--n", "5", "--alpha", "7", "--eps-ladder", "0.9,0.8,0.7,0.6")
    assert code == EXIT_FAIL
    assert not all(c["passed"] for c in json.loads(out)["checks"])


def test_compare(capsys):
    code, out, _ = _run(capsys, "compare", "--n", "4", "--alpha", "1", "--samples", "5")
    assert code == EXIT_OK
    assert json.loads(out)["results"][0]["comparison_failures"] == 0


def test_sweep_csv(capsys):
    code, out, _ = _run(capsys, "sweep", "--n", "4", "--alpha-range", "0", "1", "0.5",
                        "--tasks", "closed,symbol", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["alpha"]) for r in rows] == [0.0, 0.5, 1.0]


@pytest.mark.parametrize("argv", [
    ["constants", "--n", "2"],
    ["constants", "--format", "csv"],
    ["degenerate", "--eps-ladder", "a,b"],
    ["verify", "--suite", "rellich", "--alpha", "40"],
    ["sweep", "--tasks", "magic"],
    ["nonsense"],
    [],
])
def test_usage_errors_exit_two(capsys, argv):
    assert _run(capsys, *argv)[0] == EXIT_USAGE


def test_unwritable_output_exits_one(capsys, tmp_path):
    code, _, err = _run(capsys, "constants", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == EXIT_FAIL
    assert "cannot write" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rellich", "constants", "--deterministic"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "constants"
