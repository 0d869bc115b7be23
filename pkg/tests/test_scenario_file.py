from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from sfcgame.domain import GridTariff, ResidentialUnit, SfcDemand
from sfcgame.scenario_file import ScenarioParseError, dumps, loads, parse_scenario
from sfcgame.sim import Scenario, day_preset

SCN = Path(__file__).resolve().parents[1] / "scenarios"
BASE = (SCN / "single_slot.scn").read_text()


def test_single_slot_file():
    s = parse_scenario(SCN / "single_slot.scn")
    assert s.tariff == GridTariff(8.45, 60.0)
    assert s.demand.e_req == 50.0
    assert [u.k_pref for u in s.units] == [95, 110, 120, 135, 148]
    assert all(u.e_gen == 10.0 for u in s.units)
    assert s.sweep.price_step == 0.01


@pytest.mark.parametrize(
    "old,new,line,col,msg",
    [
        ("p_buy = 8.45", "p_buy = 80", 6, 1, "p_buy < p_sell"),
        ("e_req = 50 kWh", "e_req = 50", 11, 11, "missing unit"),
        ("e_req = 50 kWh", "e_req = 50 c", 11, 12, "unit mismatch"),
        ("e_req = 50 kWh", "e_req = 5x0 kWh", 11, 9, "malformed"),
        ("e_req = 50 kWh", "e_rq = 50 kWh", 11, 1, "unknown key"),
    ],
)
def test_errors_carry_location(old, new, line, col, msg):
    with pytest.raises(ScenarioParseError) as ei:
        loads(BASE.replace(old, new), "x.scn")
    assert (ei.value.line, ei.value.column) == (line, col)
    assert msg in str(ei.value)
    assert str(ei.value).startswith(f"x.scn:{line}:{col}:")


def test_duplicate_key():
    with pytest.raises(ScenarioParseError, match="repeated"):
        loads(BASE.replace("e_req = 50 kWh", "e_req = 50 kWh\ne_req = 60 kWh"))


def test_duplicate_unit_id():
    with pytest.raises(ScenarioParseError):
        loads(BASE.replace("id = 2", "id = 1"))


def test_unknown_section():
    with pytest.raises(ScenarioParseError, match="section"):
        loads(BASE + "\n[battery]\n")


@pytest.mark.parametrize("name", sorted(p.name for p in SCN.glob("*.scn")))
def test_shipped_files_round_trip(name):
    s = parse_scenario(SCN / name)
    assert loads(dumps(s)) == s


def test_day_preset_round_trip():
    s = day_preset(3)
    assert loads(dumps(s)) == s


@given(
    st.lists(st.floats(1, 500, allow_nan=False), min_size=1, max_size=6),
    st.floats(0.5, 30),
    st.floats(0, 200),
)
def test_round_trip_random(ks, g, e_req):
    s = Scenario(
        name="r",
        units=tuple(ResidentialUnit(i + 1, k, g) for i, k in enumerate(ks)),
        tariff=GridTariff(8.45, 61.5),
        demand=SfcDemand(e_req=e_req),
    )
    assert loads(dumps(s)) == s
