from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from hkorbits.cli import RunConfig, UsageError, grid_points, main, parse_grid, run_to_string

SMALL_GRID = ["--grid", "0.4:1.6:3x0.5:1.5:2"]


def test_verify_examples():
    assert run_to_string(["verify", "A:4:2,2", "theorem"])[0] == 0
    assert run_to_string(["verify", "A:5:2,2,1", "family:c=1"] + SMALL_GRID)[0] == 1
    assert run_to_string(["verify", "A:5:2,2,1", "family:c=1", "--expect-fail"] + SMALL_GRID)[0] == 0
    assert run_to_string(["verify", "G2", "g2"])[0] == 0
    assert run_to_string(["verify", "A:4:2,2", "theorem", "--expect-fail"] + SMALL_GRID)[0] == 1


def test_flags_and_c_override():
    code, out = run_to_string(["verify", "--orbit", "C:2:2,2", "--potential", "family",
                               "--c", "0.3"] + SMALL_GRID)
    assert code == 0 and "c=0.3" in out


@pytest.mark.parametrize("argv", [
    ["verify", "Z:4", "theorem"],
    ["verify", "A:4:2,2", "bogus"],
    ["verify", "A:4:2,2", "g2"],
    ["verify", "G2", "theorem"],
    ["verify", "A:4:2,2", "theorem", "--grid", "1:2"],
    ["verify", "A:4:2,2", "theorem", "--grid", "1:1:1"],
    ["verify", "A:4:2,2", "theorem", "--c", "1"],
    ["verify", "--potential", "theorem"],
    ["verify", "A:4:2,2", "--orbit", "A:5:2,2,1"],
    ["verify", "A:4:2,2", "theorem", "--format", "xml"],
    ["nonsense"],
    ["orbit-info", "--orbit", "A:3:2,1"],
])
def test_usage_errors(argv):
    assert run_to_string(argv)[0] == 2


def test_json_deterministic_and_parallel_order():
    base = ["verify", "B:7:3,1^4", "theorem", "--format", "json", "--no-timestamp"] + SMALL_GRID
    c1, a = run_to_string(base)
    c2, b = run_to_string(base)
    c3, par = run_to_string(base + ["--jobs", "2"])
    assert c1 == c2 == c3 == 0
    assert a == b == par
    doc = json.loads(a)
    assert doc["schema_version"] == 1 and "timestamp" not in doc
    assert [p["index"] for p in doc["points"]] == list(range(len(doc["points"])))
    assert doc["summary"]["points"] == 6 and doc["summary"]["failed"] == 0
    _, ts = run_to_string(base[:-3] + SMALL_GRID)
    assert "timestamp" in json.loads(ts)


def test_seed_changes_conjugation():
    base = ["verify", "A:4:2,2", "theorem", "--format", "json", "--no-timestamp"] + SMALL_GRID
    a = json.loads(run_to_string(base)[1])
    b = json.loads(run_to_string(base + ["--seed", "5"])[1])
    assert a["points"][0]["j_squared_residual"] != b["points"][0]["j_squared_residual"]
    assert np.isclose(a["points"][0]["point"]["eta1"], b["points"][0]["point"]["eta1"])


def test_csv_output():
    code, out = run_to_string(["verify", "A:4:2,2", "theorem", "--format", "csv"] + SMALL_GRID)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["s", "t", "eta1", "eta2", "residual_name", "value"]
    assert len(rows) == 1 + 6 * 9
    assert {r[4] for r in rows[1:]} >= {"j_squared_residual", "closedness_residual"}


def test_grid_excludes_diagonal():
    cfg = RunConfig.resolve({"orbit": "A:4:2,2", "grid": "0.3:2:5"}, None)
    pts = grid_points(cfg)
    assert len(pts) == 20
    assert all(abs(s - t) >= 1e-3 for _, s, t in pts)
    s, t = parse_grid("0.3:2:5 x 0.5:1:3")
    assert len(s) == 5 and len(t) == 3
    with pytest.raises(UsageError):
        parse_grid("-1:2:3")


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# example\norbit = C:2:2,2\npotential = family:c=0.3\n"
                        "grid = 0.5:1:2 x 0.7:1.2:2\nseed = 4\ntol-id = 1e-8\n")
    cfg = RunConfig.resolve({"seed": 9}, str(cfg_file))
    assert cfg.orbit == "C:2:2,2" and cfg.seed == 9 and cfg.tol_id == 1e-8
    assert cfg.tol_fd == 1e-6
    code, out = run_to_string(["verify", "--config", str(cfg_file)])
    assert code == 0 and out.count("PASS") == 4
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run_to_string(["verify", "--config", str(bad)])[0] == 2
    assert run_to_string(["verify", "--config", str(tmp_path / "missing")])[0] == 2


def test_tolerance_override_causes_failure():
    code, out = run_to_string(["verify", "A:4:2,2", "theorem", "--tol-id", "0"] + SMALL_GRID)
    assert code == 1 and "FAIL" in out


def test_k2_command():
    code, out = run_to_string(["k2", "--format", "json"])
    rows = json.loads(out)["rows"]
    assert code == 0 and all(r["match"] for r in rows)
    got = {r["algebra"]: r["measured"] for r in rows}
    assert [got[f"A:{m}"] for m in range(4, 9)] == pytest.approx([2, 2.5, 3, 3.5, 4], abs=1e-10)
    assert [got[s] for s in ("B:7", "D:8", "B:9", "D:10")] == pytest.approx([2.5, 3, 3.5, 4], abs=1e-10)
    assert [got[f"C:{n}"] for n in (2, 3, 4)] == pytest.approx([1.5, 2, 2.5], abs=1e-10)


def test_selftest():
    code, out = run_to_string(["selftest"])
    assert code == 0 and "FAIL" not in out
    assert run_to_string(["selftest"])[1] == out
    code, out = run_to_string(["selftest", "--inject-fault"])
    assert code == 1 and "FAIL algebra A:4" in out


def test_orbit_info():
    code, out = run_to_string(["orbit-info", "--orbit", "D:8:2^4:-", "--format", "json"])
    info = json.loads(out)
    assert code == 0
    assert info["cohomogeneity"] == 2 and info["jordan_type"] == [2, 2, 2, 2]
    assert info["k2"] == pytest.approx(3.0)
    code, out = run_to_string(["orbit-info", "--orbit", "G2", "--s", "1", "--t", "1"])
    assert code == 0 and "32" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hkorbits", "verify", "A:4:2,2", "theorem",
                           "--grid", "0.5:1:2"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "hkorbits", "verify", "A:4:2,2", "oops"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "error" in proc.stderr


def test_main_help_exits_zero(capsys):
    assert main(["--help"]) == 0
