import json
import subprocess
import sys

import numpy as np
import pytest

from curvdecomp import __version__
from curvdecomp.cli import CONVERGE_COLUMNS, main, parse_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_enumerate_prints_verdict(capsys):
    code, out, _ = run(["enumerate"], capsys)
    assert code == 0
    assert "components: Z1, Z2; unique decomposition" in out
    assert sum(name in out for name in ("EMPTY", "Z1 ", "Z2 ", "V ")) == 4


def test_non_compliant_bump_stops_at_bump_suite(tmp_path, capsys):
    code, _, err = run(["verify", "--bump", "steep", "--out", str(tmp_path)], capsys)
    assert code == 1 and "bump" in err
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["first_failure"] == "bump" and rep["passed"] is False
    assert rep["version"] == __version__ and rep["config"]["bump"] == "steep"


def test_zero_tolerance_fails(tmp_path, capsys):
    code, _, _ = run(["verify", "--tol", "0", "--level", "2", "--out", str(tmp_path)], capsys)
    assert code == 1
    assert json.loads((tmp_path / "verify.json").read_text())["first_failure"] == "sheet boundary"


def test_reports_are_byte_identical(tmp_path, capsys):
    for _ in range(2):
        run(["verify", "--level", "1", "--out", str(tmp_path)], capsys)
        (tmp_path / "verify.json").rename(tmp_path / f"r{_}.json")
    assert (tmp_path / "r0.json").read_bytes() == (tmp_path / "r1.json").read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["converge", "--levels", "3"],
        ["converge", "--levels", "3", "2"],
        ["export-mesh", "--window", "0"],
        ["verify", "--level", "0"],
        ["verify", "--bump", "cubic"],
        ["verify", "--tol", "-1"],
        [],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_converge_table(tmp_path, capsys):
    code, out, _ = run(["converge", "--levels", "2", "3", "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "converge.csv").read_text().splitlines()
    assert lines[0].split(",") == list(CONVERGE_COLUMNS)
    rows = [dict(zip(CONVERGE_COLUMNS, map(float, ln.split(",")))) for ln in lines[1:]]
    assert rows[1]["residual_max"] < rows[0]["residual_max"]
    assert rows[1]["eps"] == rows[0]["eps"] / 2
    assert rows[1]["cutoff_B"] / rows[0]["cutoff_B"] == pytest.approx(0.5, abs=0.05)


def test_converge_rejects_non_monotone_refinement(tmp_path, capsys):
    # level 1 is pre-asymptotic: its worst error happens to be below level 2's
    code, _, err = run(["converge", "--levels", "1", "2", "--out", str(tmp_path)], capsys)
    assert code == 1 and "did not decrease" in err


def test_export_mesh(tmp_path, capsys):
    code, _, _ = run(["export-mesh", "--out", str(tmp_path), "--mesh-n", "6"], capsys)
    assert code == 0
    text = (tmp_path / "sheets.obj").read_text().splitlines()
    assert sum(ln.startswith("o sheet_") for ln in text) == 6
    first = []
    for ln in text[2:]:
        if ln.startswith("o "):
            break
        if ln.startswith("v "):
            first.append([float(t) for t in ln.split()[1:]])
    v = np.array(first)
    wedge = np.abs(v[:, 1]) >= 0.75 * v[:, 0]
    assert np.allclose(v[wedge, 2], np.sign(v[wedge, 1]) * v[wedge, 0] / np.sqrt(3))


def test_io_error_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = run(["export-mesh", "--out", str(blocker / "sub")], capsys)
    assert code == 3 and "I/O error" in err


def test_config_defaults():
    cfg = parse_config(["verify"])
    assert (cfg.level, cfg.tol, cfg.bump, cfg.seed) == (4, 1e-3, "quintic-plateau", 0)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "curvdecomp", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout


@pytest.mark.slow
def test_default_verify_passes(tmp_path, capsys):
    code, out, _ = run(["verify", "--out", str(tmp_path)], capsys)
    assert code == 0, out
    rep = json.loads((tmp_path / "verify.json").read_text())
    assert rep["passed"] and len(rep["suites"]) == 9
