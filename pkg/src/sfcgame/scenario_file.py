"""Reader and writer for ``.scn`` scenario files.

Grammar (UTF-8, one statement per line)::

    # comment, also allowed after a value
    [section]                     # unit may repeat; others at most once
    key = <number> <suffix>       # suffix required for quantities
    key = [<number>, ...] <suffix>
    key = <word>                  # unitless: ids, seeds, names, booleans

Quantities take ``kWh``, ``c_per_kWh`` or ``c`` (cents).  Unitless keys
must not carry a suffix.  Unknown sections or keys are errors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .domain import (
    GridTariff,
    ResidentialUnit,
    ScenarioError,
    SfcDemand,
    StorageConfig,
    SweepConfig,
    TouSchedule,
    validate_scenario,
)
from .sim import Scenario, StudyConfig


class ScenarioParseError(ScenarioError):
    def __init__(self, message: str, line: int, column: int, path: str = "<string>"):
        self.line = line
        self.column = column
        self.path = path
        super().__init__(f"{path}:{line}:{column}: {message}")


@dataclass(frozen=True)
class _Key:
    unit: str | None  # required suffix; None for unitless
    kind: str  # "float", "int", "word", "bool", "floats", "ints", "float_or_floats"
    required: bool = False


KWH, CPK, CENTS = "kWh", "c_per_kWh", "c"

SCHEMA: dict[str, dict[str, _Key]] = {
    "scenario": {
        "name": _Key(None, "word"),
        "seed": _Key(None, "int"),
        "excess_to_grid": _Key(None, "bool"),
    },
    "tariff": {
        "p_buy": _Key(CPK, "float", True),
        "p_sell": _Key(CPK, "float", True),
    },
    "demand": {
        "e_req": _Key(KWH, "float"),
        "eqp_load": _Key(KWH, "floats"),
    },
    "unit": {
        "id": _Key(None, "int", True),
        "k_pref": _Key(CENTS, "float", True),
        "e_gen": _Key(KWH, "float_or_floats", True),
        "e_min": _Key(KWH, "float"),
    },
    "tou": {
        "prices": _Key(CPK, "floats", True),
    },
    "storage": {
        "capacity": _Key(KWH, "float", True),
        "efficiency": _Key(None, "float", True),
        "max_rate": _Key(KWH, "float", True),
        "q_ini": _Key(KWH, "float", True),
        "q_tar_ch": _Key(KWH, "float", True),
        "q_tar_dis": _Key(KWH, "float"),
        "p_min_threshold": _Key(CPK, "float", True),
        "p_max_threshold": _Key(CPK, "float", True),
    },
    "sweep": {
        "price_step": _Key(CPK, "float"),
        "alpha": _Key(CPK, "float"),
    },
    "study": {
        "n_units": _Key(None, "ints"),
        "k_range": _Key(CENTS, "floats"),
        "e_gen": _Key(KWH, "float"),
        "demand_range": _Key(KWH, "floats"),
        "e_req_values": _Key(KWH, "floats"),
        "p_sell_values": _Key(CPK, "floats"),
        "capacities": _Key(KWH, "floats"),
    },
}
REPEATABLE = {"unit"}

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?"
_SECTION = re.compile(r"^\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_SCALAR = re.compile(rf"^({_NUM})(?:\s+([A-Za-z_]+))?$")
_LIST = re.compile(rf"^\[([^\]]*)\](?:\s+([A-Za-z_]+))?$")
_WORD = re.compile(r"^[A-Za-z0-9_.\-]+$")
_NUM_ONLY = re.compile(rf"^{_NUM}$")


@dataclass
class _Value:
    value: Any
    line: int
    column: int


def _strip_comment(text: str) -> str:
    i = text.find("#")
    return text if i < 0 else text[:i]


def _parse_value(key: str, spec: _Key, raw: str, line: int, col: int, path: str) -> Any:
    def fail(msg, c=col):
        raise ScenarioParseError(msg, line, c, path)

    if spec.kind in ("word", "bool", "int"):
        if spec.kind == "word":
            if not _WORD.match(raw):
                fail(f"{key}: expected a bare word, got {raw!r}")
            return raw
        if spec.kind == "bool":
            if raw not in ("true", "false"):
                fail(f"{key}: expected true or false, got {raw!r}")
            return raw == "true"
        if not re.fullmatch(r"[-+]?\d+", raw):
            fail(f"{key}: expected an integer, got {raw!r}")
        return int(raw)

    m_list = _LIST.match(raw)
    m_scalar = _SCALAR.match(raw)
    if m_list:
        body, suffix = m_list.group(1), m_list.group(2)
        if spec.kind not in ("floats", "ints", "float_or_floats"):
            fail(f"{key}: expected a single value, got a list")
        items = [s.strip() for s in body.split(",")] if body.strip() else []
        values = []
        offset = raw.index("[") + 1
        for item in items:
            item_col = col + offset + (len(body[: body.find(item)]) if item else 0)
            if spec.kind == "ints":
                if not re.fullmatch(r"[-+]?\d+", item):
                    fail(f"{key}: malformed integer {item!r}", item_col)
                values.append(int(item))
            else:
                if not _NUM_ONLY.match(item):
                    fail(f"{key}: malformed number {item!r}", item_col)
                values.append(float(item))
        parsed: Any = tuple(values)
    elif m_scalar:
        if spec.kind in ("floats", "ints"):
            fail(f"{key}: expected a list [..]")
        suffix = m_scalar.group(2)
        parsed = float(m_scalar.group(1))
    else:
        fail(f"{key}: malformed value {raw!r}")

    suffix_col = col + raw.rfind(suffix) if suffix else col + len(raw)
    if spec.unit is None and suffix:
        fail(f"{key}: takes no unit suffix, got {suffix!r}", suffix_col)
    if spec.unit is not None and suffix is None:
        fail(f"{key}: missing unit suffix, expected {spec.unit!r}", suffix_col)
    if spec.unit is not None and suffix != spec.unit:
        fail(f"{key}: unit mismatch, expected {spec.unit!r}, got {suffix!r}", suffix_col)
    if isinstance(parsed, float) and not math.isfinite(parsed):
        fail(f"{key}: value must be finite")
    return parsed


def _read_sections(text: str, path: str) -> list[tuple[str, int, dict[str, _Value]]]:
    sections: list[tuple[str, int, dict[str, _Value]]] = []
    seen: set[str] = set()
    current: dict[str, _Value] | None = None
    name = ""
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(raw_line).rstrip()
        stripped = body.strip()
        if not stripped:
            continue
        indent = len(body) - len(body.lstrip())
        m = _SECTION.match(stripped)
        if m:
            name = m.group(1)
            if name not in SCHEMA:
                raise ScenarioParseError(f"unknown section [{name}]", lineno, indent + 1, path)
            if name in seen and name not in REPEATABLE:
                raise ScenarioParseError(f"section [{name}] given twice", lineno, indent + 1, path)
            seen.add(name)
            current = {}
            sections.append((name, lineno, current))
            continue
        m = _ASSIGN.match(stripped)
        if not m:
            raise ScenarioParseError("expected 'key = value' or '[section]'", lineno, indent + 1, path)
        if current is None:
            raise ScenarioParseError("assignment outside any section", lineno, indent + 1, path)
        key, raw = m.group(1), m.group(2).strip()
        spec = SCHEMA[name].get(key)
        if spec is None:
            raise ScenarioParseError(f"unknown key {key!r} in [{name}]", lineno, indent + 1, path)
        if key in current:
            raise ScenarioParseError(f"key {key!r} repeated in [{name}]", lineno, indent + 1, path)
        value_col = indent + 1 + stripped.index(raw) if raw else indent + len(stripped) + 1
        if not raw:
            raise ScenarioParseError(f"{key}: missing value", lineno, value_col, path)
        current[key] = _Value(_parse_value(key, spec, raw, lineno, value_col, path), lineno, value_col)
    return sections


def _require(section: str, values: dict[str, _Value], line: int, path: str) -> None:
    for key, spec in SCHEMA[section].items():
        if spec.required and key not in values:
            raise ScenarioParseError(f"[{section}] is missing required key {key!r}", line, 1, path)


def _build(section: str, values: dict[str, _Value], line: int, path: str, factory):
    """Call ``factory`` and pin any domain error to the section's location."""
    try:
        return factory({k: v.value for k, v in values.items()})
    except ScenarioParseError:
        raise
    except (ScenarioError, TypeError, ValueError) as exc:
        raise ScenarioParseError(f"[{section}]: {exc}", line, 1, path) from exc


def loads(text: str, path: str = "<string>") -> Scenario:
    sections = _read_sections(text, path)
    by_name: dict[str, tuple[int, dict[str, _Value]]] = {}
    unit_sections = []
    for name, line, values in sections:
        _require(name, values, line, path)
        if name == "unit":
            unit_sections.append((line, values))
        else:
            by_name[name] = (line, values)

    for needed in ("tariff", "demand"):
        if needed not in by_name:
            raise ScenarioParseError(f"missing section [{needed}]", 1, 1, path)

    line, vals = by_name["tariff"]
    tariff = _build("tariff", vals, line, path, lambda v: GridTariff(v["p_buy"], v["p_sell"]))

    line, vals = by_name["demand"]
    demand = _build(
        "demand", vals, line, path,
        lambda v: SfcDemand(e_req=v.get("e_req"), eqp_load=v.get("eqp_load", ())),
    )

    units = []
    generation = []
    for line, vals in unit_sections:
        gen = vals["e_gen"].value
        profile = gen if isinstance(gen, tuple) else None
        base_gen = profile[0] if profile else gen
        units.append(_build(
            "unit", vals, line, path,
            lambda v, g=base_gen: ResidentialUnit(v["id"], v["k_pref"], g, v.get("e_min", 0.0)),
        ))
        generation.append(profile)
    ids = [u.id for u in units]
    if len(set(ids)) != len(ids):
        raise ScenarioParseError("duplicate unit id", unit_sections[-1][0], 1, path)

    kwargs: dict[str, Any] = {}
    if "tou" in by_name:
        line, vals = by_name["tou"]
        kwargs["tou"] = _build("tou", vals, line, path, lambda v: TouSchedule(v["prices"]))
    if "storage" in by_name:
        line, vals = by_name["storage"]
        kwargs["storage"] = _build("storage", vals, line, path, lambda v: StorageConfig(**v))
    if "sweep" in by_name:
        line, vals = by_name["sweep"]
        kwargs["sweep"] = _build("sweep", vals, line, path, lambda v: SweepConfig(**v))
    if "study" in by_name:
        line, vals = by_name["study"]
        kwargs["study"] = _build("study", vals, line, path, lambda v: StudyConfig(**v))
    meta = {k: v.value for k, v in by_name.get("scenario", (0, {}))[1].items()}

    line = by_name.get("scenario", (1, {}))[0]
    scenario = _build(
        "scenario", {}, line, path,
        lambda _: Scenario(
            name=meta.get("name", Path(path).stem if path != "<string>" else "scenario"),
            units=tuple(units),
            tariff=tariff,
            demand=demand,
            seed=meta.get("seed", 0),
            excess_to_grid=meta.get("excess_to_grid", False),
            generation=tuple(generation) if any(p is not None for p in generation) else (),
            **kwargs,
        ),
    )
    validate_scenario(scenario.units, scenario.tariff, scenario.demand)
    return scenario


def parse_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), str(path))


def _num(x: float) -> str:
    return repr(float(x))


def _list(xs) -> str:
    return "[" + ", ".join(_num(x) for x in xs) + "]"


def dumps(scenario: Scenario) -> str:
    """Serialise ``scenario``; ``loads(dumps(s)) == s`` for any parsed scenario."""
    out = ["[scenario]", f"name = {scenario.name}", f"seed = {scenario.seed}",
           f"excess_to_grid = {'true' if scenario.excess_to_grid else 'false'}", ""]
    out += ["[tariff]", f"p_buy = {_num(scenario.tariff.p_buy)} {CPK}",
            f"p_sell = {_num(scenario.tariff.p_sell)} {CPK}", ""]
    out.append("[demand]")
    if scenario.demand.e_req is not None:
        out.append(f"e_req = {_num(scenario.demand.e_req)} {KWH}")
    if scenario.demand.eqp_load:
        out.append(f"eqp_load = {_list(scenario.demand.eqp_load)} {KWH}")
    out.append("")
    profiles = scenario.generation or (None,) * len(scenario.units)
    for u, prof in zip(scenario.units, profiles):
        gen = _list(prof) if prof is not None else _num(u.e_gen)
        out += ["[unit]", f"id = {u.id}", f"k_pref = {_num(u.k_pref)} {CENTS}",
                f"e_gen = {gen} {KWH}", f"e_min = {_num(u.e_min)} {KWH}", ""]
    if scenario.tou is not None:
        out += ["[tou]", f"prices = {_list(scenario.tou.prices)} {CPK}", ""]
    if scenario.storage is not None:
        s = scenario.storage
        out += [
            "[storage]",
            f"capacity = {_num(s.capacity)} {KWH}",
            f"efficiency = {_num(s.efficiency)}",
            f"max_rate = {_num(s.max_rate)} {KWH}",
            f"q_ini = {_num(s.q_ini)} {KWH}",
            f"q_tar_ch = {_num(s.q_tar_ch)} {KWH}",
            f"q_tar_dis = {_num(s.q_tar_dis)} {KWH}",
            f"p_min_threshold = {_num(s.p_min_threshold)} {CPK}",
            f"p_max_threshold = {_num(s.p_max_threshold)} {CPK}",
            "",
        ]
    out += ["[sweep]", f"price_step = {_num(scenario.sweep.price_step)} {CPK}",
            f"alpha = {_num(scenario.sweep.alpha)} {CPK}", ""]
    st = scenario.study
    if st is not None:
        out += ["[study]", "n_units = [" + ", ".join(str(n) for n in st.n_units) + "]",
                f"k_range = {_list(st.k_range)} {CENTS}", f"e_gen = {_num(st.e_gen)} {KWH}",
                f"demand_range = {_list(st.demand_range)} {KWH}"]
        if st.e_req_values:
            out.append(f"e_req_values = {_list(st.e_req_values)} {KWH}")
        if st.p_sell_values:
            out.append(f"p_sell_values = {_list(st.p_sell_values)} {CPK}")
        if st.capacities:
            out.append(f"capacities = {_list(st.capacities)} {KWH}")
        out.append("")
    return "\n".join(out)
