import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from arithdyn.cli import main
from arithdyn.errors import SpecError
from arithdyn.harness import config_hash, run_campaign, strip_timestamp
from arithdyn.systems import Budgets, load_spec, parse_system, spec_from_json

ROOT = Path(__file__).resolve().parent.parent
SYSTEMS = ROOT / "systems"
DATA = Path(__file__).resolve().parent / "data"


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "arithdyn", *map(str, args)],
                          capture_output=True, text=True, cwd=ROOT, env=env)


def test_spec_roundtrip():
    for p in sorted(SYSTEMS.glob("*.json")):
        if p.name.endswith(".oracle.json"):
            continue
        spec = load_spec(p)
        again = spec_from_json(spec.to_json(), base_dir=SYSTEMS)
        assert again.to_json() == spec.to_json()
        assert config_hash(again) == config_hash(spec)


def test_unknown_kind():
    with pytest.raises(SpecError):
        parse_system({"kind": "elliptic"})


def test_budget_env_override():
    b = Budgets().with_env({"ARITHDYN_MAX_ITERS": "7", "ARITHDYN_TOLERANCE": "0.01"})
    assert b.max_iters == 7 and b.tolerance == 0.01
    assert b.updated({"max_iters": None, "window": 3}).window == 3


def test_squaring_end_to_end(tmp_path):
    out = tmp_path / "r.json"
    assert run_campaign(SYSTEMS / "squaring.json", out) == 0
    rep = json.loads(out.read_text())
    sysrep = rep["systems"][0]
    assert sysrep["delta"]["exact"] and float(sysrep["delta"]["delta_lower"]) == 2.0
    first = sysrep["points"][0]
    assert first["ksc_verdict"] == "consistent"
    assert abs(float(first["alpha"]["point_value"]) - 2.0) < 1e-9


def test_fibonacci_end_to_end(tmp_path):
    out = tmp_path / "r.json"
    assert run_campaign(SYSTEMS / "fib.json", out) == 0
    s = json.loads(out.read_text())["systems"][0]
    lo, hi = float(s["delta"]["delta_lower"]), float(s["delta"]["delta_upper"])
    a = float(s["points"][0]["alpha"]["point_value"])
    assert lo - 1e-3 <= a <= hi + 1e-3


def test_invalid_fan_exit_two(tmp_path, capsys):
    assert run_campaign(DATA / "bad_fan.json", tmp_path / "r.json") == 2
    assert "NotComplete" in capsys.readouterr().err
    assert not (tmp_path / "r.json").exists()


def test_bad_kind_exit_two(tmp_path):
    assert run_campaign(DATA / "bad_kind.json", tmp_path / "r.json") == 2


def test_false_density_tag_gives_inconsistent(tmp_path):
    # orbit stays in P^1 x {1}: alpha = 2 but delta = 3
    out = tmp_path / "r.json"
    assert run_campaign(DATA / "lying_tag.json", out) == 1
    assert json.loads(out.read_text())["summary"]["inconsistent"] == 1


def test_csv_is_rfc4180(tmp_path):
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    assert run_campaign(SYSTEMS / "squaring.json", out, table) == 0
    raw = table.read_bytes()
    assert raw.count(b"\r\n") == 4
    rows = list(csv.reader(table.open(newline="", encoding="utf-8")))
    assert rows[0][0] == "system" and json.loads(rows[1][1]) == ["2", "1"]


def test_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_campaign(SYSTEMS / "sq-cube.json", a, jobs=1)
    run_campaign(SYSTEMS / "sq-cube.json", b, jobs=3)
    assert strip_timestamp(a.read_text()) == strip_timestamp(b.read_text())


def test_cli_delta_fib():
    r = run_cli("delta", "systems/fib.json")
    assert r.returncode == 0
    d = json.loads(r.stdout)
    assert 1.617 < float(d["delta_lower"]) <= 1.6180339887498949 <= float(d["delta_upper"]) < 1.619


def test_cli_zf_sq_cube(tmp_path):
    r = run_cli("zf", "systems/sq-cube.json", "--bound", "4.6", "--tol", "1e-6",
                "--csv", tmp_path / "zf.csv")
    assert r.returncode == 0, r.stderr
    d = json.loads(r.stdout)
    assert d["count"] == 16 and d["violations"] == 0
    assert len(list(csv.reader((tmp_path / "zf.csv").open(newline="")))) == 17


def test_cli_toric_info():
    r = run_cli("toric-info", "systems/fans/p1xp1.json")
    assert r.returncode == 0, r.stderr
    d = json.loads(r.stdout)
    assert len(d["nef_extremal_classes"]) == 2 and len(d["fibrations"]) == 2


def test_cli_alpha_and_canht():
    r = run_cli("alpha", "systems/squaring.json", "--point", '["3", "2"]', "--max-iters", "8")
    assert r.returncode == 0, r.stderr
    assert abs(float(json.loads(r.stdout)["alpha"]["point_value"]) - 2.0) < 1e-9
    r = run_cli("canht", "systems/squaring.json", "--point", '["2", "1"]', "--target", "1e-12")
    assert r.returncode == 0, r.stderr
    d = json.loads(r.stdout)
    assert abs(float(d["ample"]["value"]) - math.log(2)) < 1e-12


def test_cli_errors_exit_two():
    assert run_cli("verify", "tests/data/bad_fan.json").returncode == 2
    assert run_cli("delta", "no/such/file.json").returncode == 2
    assert run_cli("canht", "systems/fib.json").returncode == 2


def test_cli_in_process(capsys):
    assert main(["delta", str(SYSTEMS / "squaring.json")]) == 0
    assert json.loads(capsys.readouterr().out)["method"] == "exact-degree"


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run_cli("verify", "systems", "-o", out).returncode == 0
    ta, tb = a.read_text(), b.read_text()
    strip = [line for line in ta.splitlines() if '"timestamp"' not in line]
    assert strip == [line for line in tb.splitlines() if '"timestamp"' not in line]
