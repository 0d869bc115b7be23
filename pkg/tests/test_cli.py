import subprocess
import sys
from pathlib import Path

import pytest

from sfcgame import __version__
from sfcgame.cli import fmt, main

SCN = Path(__file__).resolve().parents[1] / "scenarios"


def _rows(path):
    lines = path.read_text().splitlines()
    return lines[:2], [l.split(",") for l in lines[2:]]


def test_fmt_rounding():
    assert fmt(0.0000005) == "0.000000"  # half-to-even
    assert fmt(0.0000015) == "0.000002"
    assert fmt(-0.0000001) == "0.000000"
    assert fmt(105) == "105"
    assert fmt(105.0) == "105.000000"
    assert fmt(True) == "true"


def test_sweep_n_baseline_column(tmp_path):
    assert main(["sweep-n", str(SCN / "cost_vs_units.scn"), "--out", str(tmp_path), "--seeds", "3"]) == 0
    head, rows = _rows(tmp_path / "sweep_n.csv")
    assert head[0] == f"# seed=0 version={__version__}"
    assert head[1].startswith("# numbers:")
    assert rows[0] == ["n_units", "baseline_usd", "proposed_usd", "reduction_pct"]
    assert [r[1] for r in rows[1:]] == ["105.000000"] * 5
    assert [int(r[0]) for r in rows[1:]] == [5, 10, 15, 20, 25]


def test_equilibrium_outputs(tmp_path):
    assert main(["equilibrium", str(SCN / "single_slot.scn"), "--out", str(tmp_path)]) == 0
    _, rows = _rows(tmp_path / "equilibrium_trace.csv")
    prices = [float(r[0]) for r in rows[1:]]
    assert prices == sorted(prices) and prices[0] == 8.45 and prices[-1] == 60.0
    _, units = _rows(tmp_path / "equilibrium_units.csv")
    assert len(units) == 6
    summary = dict(_rows(tmp_path / "equilibrium_summary.csv")[1][1:])
    assert float(summary["sfc_cost_star_usd"]) < float(summary["baseline_usd"]) == 30.0


def test_verify_exit_code(tmp_path):
    assert main(["verify", str(SCN / "single_slot.scn"), "--out", str(tmp_path)]) == 0
    _, rows = _rows(tmp_path / "verify.csv")
    assert all(r[1] == "true" for r in rows[1:])


def test_bad_scenario_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text((SCN / "single_slot.scn").read_text().replace("p_buy = 8.45", "p_buy = 80"))
    assert main(["equilibrium", str(bad), "--out", str(tmp_path)]) == 2
    assert "bad.scn:6:1" in capsys.readouterr().err
    assert main(["equilibrium", str(tmp_path / "missing.scn")]) == 2


def test_csv_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["day", str(SCN / "day.scn"), "--out", str(tmp_path / d), "--seed", "3"]) == 0
    for name in ("day.csv", "day_totals.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        assert b"\r\n" not in a


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "sfcgame", "verify", str(SCN / "single_slot.scn"), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
